#pragma once

// Umbrella header.

#include "stegica/analysis.hpp"
#include "stegica/coupling.hpp"
#include "stegica/cross_validation.hpp"
#include "stegica/error.hpp"
#include "stegica/fastica.hpp"
#include "stegica/feature_store.hpp"
#include "stegica/features.hpp"
#include "stegica/image.hpp"
#include "stegica/image_io.hpp"
#include "stegica/manifest.hpp"
#include "stegica/model_io.hpp"
#include "stegica/pca.hpp"
#include "stegica/pipeline.hpp"
#include "stegica/rng.hpp"
#include "stegica/stegosim.hpp"
#include "stegica/svm.hpp"
#include "stegica/synthetic.hpp"
#include "stegica/wavelet.hpp"
