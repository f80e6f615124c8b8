#pragma once

#include <array>
#include <vector>

#include "histofeat/image.hpp"

namespace histofeat {

// Optical-density image, H*W*3 row-major. Values are finite and >= 0.
struct OdImage {
    int width = 0;
    int height = 0;
    int io = 255;  // transmitted-light reference intensity
    std::vector<double> od;

    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

// Two-stain optical-density basis. Columns are unit-norm, entrywise
// nonnegative, hematoxylin first (larger blue-channel coefficient).
struct StainBasis {
    // vectors[channel][stain], channels R,G,B; stain 0 = hematoxylin.
    std::array<std::array<double, 2>, 3> vectors{};
    std::array<double, 2> max_concentrations{};
};

struct MacenkoParams {
    double alpha = 1.0;   // percentile for extreme angles, in (0, 50)
    double beta = 0.15;   // OD threshold for tissue retention
    int io = 255;
};

// Beer-Lambert transform: od = -log10((v + 1) / io), clamped at 0 so the
// v = io - 1 .. 255 range cannot produce negative densities.
OdImage rgb_to_od(const ImageU8& image, int io = 255);

// Macenko stain estimation: principal plane of the retained OD cloud,
// percentile extreme angles, nonnegative unit stain vectors, 99th-percentile
// reference concentrations. Bitwise invariant to pixel order.
StainBasis estimate_stain_basis(const OdImage& od, double alpha = 1.0, double beta = 0.15);

// Remaps the image's stain concentrations from `source` onto `reference`
// and reconstructs RGB.
ImageU8 normalize_to_reference(const ImageU8& image, const StainBasis& source,
                               const StainBasis& reference, int io = 255);

// estimate + normalize in one step, with the estimation parameters used by
// the pipeline.
ImageU8 macenko_normalize(const ImageU8& image, const StainBasis& reference,
                          const MacenkoParams& params = {});

// Canonical H&E directions, overridable via the pipeline config.
StainBasis default_reference_basis();

// Throws InvalidInput when the basis violates its invariants.
void validate_basis(const StainBasis& basis);

// Angle between two 3-vectors in degrees (used by recovery checks).
double angle_degrees(const std::array<double, 3>& a, const std::array<double, 3>& b);

}  // namespace histofeat
