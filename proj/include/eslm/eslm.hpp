#pragma once

#include "eslm/common.hpp"
#include "eslm/corpus.hpp"
#include "eslm/docspace.hpp"
#include "eslm/lda.hpp"
#include "eslm/word2vec.hpp"
#include "eslm/entity.hpp"
#include "eslm/doc2vec.hpp"
#include "eslm/sert.hpp"
#include "eslm/baselines.hpp"
#include "eslm/eval.hpp"
#include "eslm/synth.hpp"
#include "eslm/serialize.hpp"
