#pragma once

// Umbrella header for the melkit multimodal entity-linking library.

#include "melkit/augment.hpp"
#include "melkit/cache.hpp"
#include "melkit/config.hpp"
#include "melkit/demo.hpp"
#include "melkit/errors.hpp"
#include "melkit/eval.hpp"
#include "melkit/fuzzy.hpp"
#include "melkit/gateway.hpp"
#include "melkit/index.hpp"
#include "melkit/jsonl.hpp"
#include "melkit/prompts.hpp"
#include "melkit/retrieval.hpp"
#include "melkit/selection.hpp"
#include "melkit/split.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"
