#pragma once

#include "hhcl/clustering.hpp"
#include "hhcl/config.hpp"
#include "hhcl/core.hpp"
#include "hhcl/encoder.hpp"
#include "hhcl/eval.hpp"
#include "hhcl/loss.hpp"
#include "hhcl/memory.hpp"
#include "hhcl/sampler.hpp"
#include "hhcl/synthdata.hpp"
#include "hhcl/trainer.hpp"
