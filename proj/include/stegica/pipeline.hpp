#pragma once

// Image -> feature vector:
//   DWT -> observations -> PCA -> project(pair) -> FastICA -> canonicalize -> moments

#include "stegica/features.hpp"
#include "stegica/image.hpp"
#include "stegica/pca.hpp"
#include "stegica/wavelet.hpp"

namespace stegica {

/// Default operating point: the 9th and 11th largest-variance components.
inline const ComponentIndexPair kDefaultPair{9, 11};

/// PCA state of one image, reusable across component pairs.
struct PreparedImage {
    ObservationMatrix obs;
    PCAModel pca;
};

inline PreparedImage prepare_image(const Image& img) {
    PreparedImage p;
    p.obs = build_observations(haar_dwt(img));
    p.pca = pca_fit(p.obs);
    return p;
}

inline ComponentPair separate_components(const PreparedImage& prep, ComponentIndexPair pair, const ICAParams& ica) {
    ComponentPair cp = fastica(pca_project(prep.obs, prep.pca, pair), ica);
    cp.selected_indices = pair;
    return canonicalize(std::move(cp));
}

inline FeatureVector extract_features(const PreparedImage& prep, ComponentIndexPair pair, const ICAParams& ica) {
    return assemble_features(separate_components(prep, pair, ica));
}

inline FeatureVector extract_features(const Image& img, ComponentIndexPair pair, const ICAParams& ica) {
    return extract_features(prepare_image(img), pair, ica);
}

} // namespace stegica
