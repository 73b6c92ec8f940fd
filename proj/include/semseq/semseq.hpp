#pragma once

// Umbrella header: the whole pipeline from frame loading to evaluation.

#include "semseq/config.hpp"
#include "semseq/core.hpp"
#include "semseq/diffmatrix.hpp"
#include "semseq/evaluate.hpp"
#include "semseq/hmm.hpp"
#include "semseq/ingest.hpp"
#include "semseq/normalize.hpp"
#include "semseq/pipeline.hpp"
#include "semseq/preprocess.hpp"
#include "semseq/search.hpp"
#include "semseq/segmentation.hpp"
#include "semseq/synth.hpp"
#include "semseq/types.hpp"
