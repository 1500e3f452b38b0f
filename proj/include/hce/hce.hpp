#pragma once

#include "hce/categorize.hpp"
#include "hce/cluster.hpp"
#include "hce/config.hpp"
#include "hce/corpus.hpp"
#include "hce/embedding.hpp"
#include "hce/hierarchy.hpp"
#include "hce/lexicon.hpp"
#include "hce/pipeline.hpp"
#include "hce/random.hpp"
#include "hce/relatedness.hpp"
#include "hce/report.hpp"
#include "hce/sampler.hpp"
#include "hce/synthetic.hpp"
#include "hce/trainer.hpp"
#include "hce/types.hpp"
#include "hce/vocabulary.hpp"
