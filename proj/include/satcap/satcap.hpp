#pragma once

#include "satcap/augment.hpp"
#include "satcap/bleu.hpp"
#include "satcap/confusion.hpp"
#include "satcap/corpus.hpp"
#include "satcap/discover.hpp"
#include "satcap/error.hpp"
#include "satcap/readability.hpp"
#include "satcap/tokenize.hpp"
#include "satcap/vocabstats.hpp"
