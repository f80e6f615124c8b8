#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histofeat/image.hpp"
#include "histofeat/stain.hpp"

namespace histofeat {

// Knobs for the synthetic H&E corpus. Tiles are drawn as two sinusoidal
// stain-concentration fields (one per stain) whose frequency (strong cue) and
// orientation group (weak cue, shared between classes) depend on the class,
// then pushed through Beer-Lambert with a stain basis. The target domain
// differs from the source in three ways: its stain basis is hue-rotated
// (which normalization removes), its texture frequencies are offset, and a
// random per-tile shading field modulates stain density (both of which
// normalization keeps, so a source-trained extractor is genuinely degraded
// until it is tuned on target tiles).
struct SyntheticSpec {
    int n_classes = 9;
    int tiles_per_class_source = 100;
    int tiles_per_class_target = 200;
    int tile_size = 32;
    int patients = 45;
    int patient_grid = 4;  // patient image = grid x grid class-sampled cells
    int genes = 12;
    int mutations = 4;
    double concentration_noise = 0.05;  // per-pixel stain concentration jitter
    double expression_noise = 0.5;      // additive noise on gene targets
    double mutation_noise = 0.08;      // additive noise before thresholding flags
    double shift_hue_degrees = 14.0;   // target-domain stain basis rotation
    double shift_frequency = 0.6;      // target-domain texture frequency offset
    double shade_amplitude = 0.15;     // target-only random shading strength
    double shade_frequency = 0.7;      // cycles per tile of the shading field
    double target_amplitude_scale = 0.6;  // wave-contrast factor for target tiles
    double min_ks_distance = 0.05;     // required channel-histogram separation
    std::uint64_t seed = 0;
};

void validate_synthetic_spec(const SyntheticSpec& spec);

struct SyntheticOutputs {
    std::string source_dir;
    std::string target_dir;
    std::string manifest_path;
    std::string expression_path;
    std::string mutation_path;
};

// Writes the full corpus under out_dir: source/<class>/<tile>.png,
// target/<class>/<tile>.png, patients/<id>.png + patients.csv,
// expression.csv and mutation.csv. Verifies that the raw source and target
// tile populations are separable by at least min_ks_distance in some RGB
// channel histogram, otherwise throws ConfigError.
SyntheticOutputs generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

// Stain bases used by the generator; the target basis is the source basis
// rotated about the gray axis by shift_hue_degrees.
StainBasis synthetic_source_basis();
StainBasis synthetic_target_basis(double hue_degrees);

// One tile image. Pixels are laid out in physical coordinates, so drawing the
// same cell at twice the resolution yields the same pattern scaled up; pixel
// noise is drawn per pixel from tile_seed.
ImageU8 synth_tile(const SyntheticSpec& spec, int cls, bool target_domain,
                   std::uint64_t tile_seed, int pixels_per_cell);

// Per-gene class means, genes x n_classes row-major; derived from the corpus
// seed only, so targets can be recomputed exactly.
std::vector<double> synthetic_gene_means(const SyntheticSpec& spec);

}  // namespace histofeat
