#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/alignment_json.hpp"
#include "phonalign/common.hpp"
#include "phonalign/config.hpp"
#include "phonalign/embedding.hpp"
#include "phonalign/frame_labeling.hpp"
#include "phonalign/knn.hpp"
#include "phonalign/metrics.hpp"
#include "phonalign/npy.hpp"
#include "phonalign/pca.hpp"
#include "phonalign/pipeline.hpp"
#include "phonalign/sampa.hpp"
#include "phonalign/segmenter.hpp"
#include "phonalign/synth.hpp"
#include "phonalign/textgrid.hpp"
#include "phonalign/timit.hpp"
