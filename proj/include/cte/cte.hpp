#pragma once

// contrastive topic embedding laboratory: generative sampling, exact
// posterior-recovery oracles, trainable contrastive models, and evaluation
#include "cte/config.hpp"
#include "cte/contrastive.hpp"
#include "cte/embedding.hpp"
#include "cte/eval.hpp"
#include "cte/io.hpp"
#include "cte/learner.hpp"
#include "cte/linalg.hpp"
#include "cte/monomials.hpp"
#include "cte/nn.hpp"
#include "cte/numeric.hpp"
#include "cte/oracle.hpp"
#include "cte/pipeline.hpp"
#include "cte/probe.hpp"
#include "cte/rng.hpp"
#include "cte/svg.hpp"
#include "cte/topic_model.hpp"
