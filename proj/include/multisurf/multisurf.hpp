#pragma once

// Umbrella header: recognition (ingest, prompt, backend, classify, eval)
// and reasoning (context).

#include "multisurf/base64.hpp"
#include "multisurf/classify.hpp"
#include "multisurf/context.hpp"
#include "multisurf/decision_forest.hpp"
#include "multisurf/errors.hpp"
#include "multisurf/eval.hpp"
#include "multisurf/image_corpus.hpp"
#include "multisurf/linear_svm.hpp"
#include "multisurf/manifest.hpp"
#include "multisurf/metrics.hpp"
#include "multisurf/model_backend.hpp"
#include "multisurf/prompt.hpp"
#include "multisurf/radar_table.hpp"
#include "multisurf/response_parse.hpp"
#include "multisurf/rng.hpp"
#include "multisurf/sha256.hpp"
#include "multisurf/strings.hpp"
#include "multisurf/validate.hpp"
