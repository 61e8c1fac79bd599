#pragma once

// Umbrella header pulling in the whole library.

#include "gaze2afc/cascade.hpp"
#include "gaze2afc/config.hpp"
#include "gaze2afc/csv.hpp"
#include "gaze2afc/diagnostics.hpp"
#include "gaze2afc/error.hpp"
#include "gaze2afc/evidence.hpp"
#include "gaze2afc/features.hpp"
#include "gaze2afc/inference.hpp"
#include "gaze2afc/information.hpp"
#include "gaze2afc/ingest.hpp"
#include "gaze2afc/io.hpp"
#include "gaze2afc/kinematics.hpp"
#include "gaze2afc/pipeline.hpp"
#include "gaze2afc/rng.hpp"
#include "gaze2afc/svg.hpp"
#include "gaze2afc/synth.hpp"
#include "gaze2afc/types.hpp"
