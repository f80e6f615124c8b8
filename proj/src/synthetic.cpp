#include "histofeat/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/dataset.hpp"
#include "histofeat/io_util.hpp"
#include "histofeat/logging.hpp"
#include "histofeat/rng.hpp"
#include "histofeat/stats.hpp"

namespace histofeat {

namespace {

constexpr double kPi = std::numbers::pi;

std::string padded(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
    return std::string(buf);
}

std::array<double, 3> rotate_about_gray(const std::array<double, 3>& v, double degrees) {
    // Rodrigues rotation about the unit gray axis (1,1,1)/sqrt(3).
    const double k = 1.0 / std::sqrt(3.0);
    const double rad = degrees * kPi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    std::array<double, 3> cross = {k * (v[2] - v[1]), k * (v[0] - v[2]), k * (v[1] - v[0])};
    double dot = k * (v[0] + v[1] + v[2]);
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) out[i] = v[i] * c + cross[i] * s + k * dot * (1.0 - c);
    return out;
}

struct TexParams {
    double f_h, f_e;
    double base_h, amp_h, base_e, amp_e;
};

// Wave orientation and phase are drawn per tile, so they carry no label
// information, and base levels are class-independent (stain normalization
// would mostly erase them anyway).  In the source domain the class is
// carried by the first stain's frequency while the second sweeps a nuisance
// range.  The target domain offsets the first frequency, makes the second
// class-linked as well, and renders both waves at reduced amplitude: weaker
// texture contrast pushes a source-calibrated head's units toward their
// dead zone, which re-training the head on target data undoes.
TexParams class_texture(const SyntheticSpec& spec, int cls, bool target_domain, Rng& rng) {
    TexParams t;
    const double scale = target_domain ? spec.target_amplitude_scale : 1.0;
    if (target_domain) {
        t.f_h = 1.0 + 0.3 * cls + spec.shift_frequency;
        t.f_e = 1.4 + 0.2 * cls;
    } else {
        t.f_h = 1.0 + 0.3 * cls;
        t.f_e = rng.uniform(1.4, 3.2);
    }
    t.base_h = 0.60;
    t.amp_h = 0.5 * scale;
    t.base_e = 0.35;
    t.amp_e = 0.35 * scale;
    return t;
}

void accumulate_histogram(const ImageU8& img, std::array<std::vector<std::uint64_t>, 3>& hist) {
    const std::uint8_t* p = img.pixels.data();
    std::size_t n = std::size_t(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i)
        for (int ch = 0; ch < 3; ++ch) hist[ch][p[i * 3 + ch]]++;
}

}  // namespace

void validate_synthetic_spec(const SyntheticSpec& spec) {
    if (spec.n_classes < 2 || spec.n_classes > 64)
        throw ConfigError("synthetic.classes must be in [2, 64]");
    if (spec.tile_size < 8) throw ConfigError("synthetic.tile_size must be at least 8");
    if (spec.tiles_per_class_source < 1 || spec.tiles_per_class_target < 1)
        throw ConfigError("synthetic tile counts must be positive");
    if (spec.patients < 0) throw ConfigError("synthetic.patients must be nonnegative");
    if (spec.patient_grid < 1) throw ConfigError("synthetic.patient_grid must be positive");
    if (spec.genes < 0 || spec.mutations < 0)
        throw ConfigError("synthetic gene and mutation counts must be nonnegative");
    if (!(spec.concentration_noise >= 0) || !(spec.expression_noise >= 0) ||
        !(spec.mutation_noise >= 0))
        throw ConfigError("synthetic noise levels must be nonnegative");
    if (!(spec.min_ks_distance >= 0) || spec.min_ks_distance > 1)
        throw ConfigError("synthetic.min_ks_distance must be in [0, 1]");
    if (!std::isfinite(spec.shift_hue_degrees) || !std::isfinite(spec.shift_frequency))
        throw ConfigError("synthetic domain shift values must be finite");
    if (!(spec.shade_amplitude >= 0) || spec.shade_amplitude >= 1 ||
        !(spec.shade_frequency >= 0))
        throw ConfigError("synthetic shading must satisfy 0 <= amplitude < 1, frequency >= 0");
    if (!(spec.target_amplitude_scale > 0) || spec.target_amplitude_scale > 1)
        throw ConfigError("synthetic.target_amplitude_scale must be in (0, 1]");
}

StainBasis synthetic_source_basis() { return default_reference_basis(); }

StainBasis synthetic_target_basis(double hue_degrees) {
    StainBasis src = synthetic_source_basis();
    StainBasis out = src;
    for (int s = 0; s < 2; ++s) {
        std::array<double, 3> v = {src.vectors[0][s], src.vectors[1][s], src.vectors[2][s]};
        v = rotate_about_gray(v, hue_degrees);
        double norm = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
            v[ch] = std::max(v[ch], 0.0);  // rotation may push a small component negative
            norm += v[ch] * v[ch];
        }
        norm = std::sqrt(norm);
        for (int ch = 0; ch < 3; ++ch) out.vectors[ch][s] = v[ch] / norm;
    }
    return out;
}

ImageU8 synth_tile(const SyntheticSpec& spec, int cls, bool target_domain,
                   std::uint64_t tile_seed, int pixels_per_cell) {
    const int n = pixels_per_cell;
    ImageU8 img = make_image(n, n);
    Rng rng(tile_seed);
    const double ang_h = rng.uniform(0.0, kPi);
    const double ang_e = rng.uniform(0.0, kPi);
    const double phase_h = rng.uniform(0.0, 2.0 * kPi);
    const double phase_e = rng.uniform(0.0, 2.0 * kPi);
    // Target-only nuisance: a smooth random shading field that modulates stain
    // density, uncorrelated with the class.
    const double shade_ang = rng.uniform(0.0, 2.0 * kPi);
    const double shade_phase = rng.uniform(0.0, 2.0 * kPi);
    const double shade_amp = target_domain ? spec.shade_amplitude : 0.0;
    const TexParams t = class_texture(spec, cls, target_domain, rng);
    const StainBasis basis =
        target_domain ? synthetic_target_basis(spec.shift_hue_degrees) : synthetic_source_basis();
    const double ch_h = std::cos(ang_h), sh_h = std::sin(ang_h);
    const double ch_e = std::cos(ang_e), sh_e = std::sin(ang_e);
    const double ch_s = std::cos(shade_ang), sh_s = std::sin(shade_ang);
    for (int y = 0; y < n; ++y) {
        std::uint8_t* row = img.row(y);
        double v = (y + 0.5) / n;
        for (int x = 0; x < n; ++x) {
            double u = (x + 0.5) / n;
            double wave_h = std::sin(2.0 * kPi * t.f_h * (u * ch_h + v * sh_h) + phase_h);
            double wave_e = std::sin(2.0 * kPi * t.f_e * (u * ch_e + v * sh_e) + phase_e);
            double shade =
                1.0 + shade_amp * std::sin(2.0 * kPi * spec.shade_frequency *
                                               (u * ch_s + v * sh_s) +
                                           shade_phase);
            double c_h = shade * (t.base_h + t.amp_h * 0.5 * (wave_h + 1.0)) +
                         rng.normal(0.0, spec.concentration_noise);
            double c_e = shade * (t.base_e + t.amp_e * 0.5 * (wave_e + 1.0)) +
                         rng.normal(0.0, spec.concentration_noise);
            c_h = std::max(c_h, 0.0);
            c_e = std::max(c_e, 0.0);
            for (int ch = 0; ch < 3; ++ch) {
                double od = basis.vectors[ch][0] * c_h + basis.vectors[ch][1] * c_e;
                double value = 255.0 * std::pow(10.0, -od) - 1.0;
                long q = std::lround(value);
                row[x * 3 + ch] = std::uint8_t(std::clamp(q, 0L, 255L));
            }
        }
    }
    return img;
}

std::vector<double> synthetic_gene_means(const SyntheticSpec& spec) {
    Rng rng(derive_seed(spec.seed, "genes"));
    std::vector<double> means(std::size_t(spec.genes) * spec.n_classes);
    for (double& m : means) m = 20.0 + 80.0 * rng.uniform();
    return means;
}

SyntheticOutputs generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    validate_synthetic_spec(spec);

    SyntheticOutputs outs;
    outs.source_dir = out_dir + "/source";
    outs.target_dir = out_dir + "/target";
    outs.manifest_path = out_dir + "/patients.csv";
    outs.expression_path = out_dir + "/expression.csv";
    outs.mutation_path = out_dir + "/mutation.csv";
    fs::create_directories(out_dir);

    std::array<std::array<std::vector<std::uint64_t>, 3>, 2> hist;
    for (auto& domain : hist)
        for (auto& channel : domain) channel.assign(256, 0);

    for (int domain = 0; domain < 2; ++domain) {
        const bool target = domain == 1;
        const std::string root = target ? outs.target_dir : outs.source_dir;
        const int per_class = target ? spec.tiles_per_class_target : spec.tiles_per_class_source;
        const char* tag = target ? "target_tile" : "source_tile";
        for (int cls = 0; cls < spec.n_classes; ++cls) {
            std::string dir = root + "/" + padded("c", cls, 2);
            fs::create_directories(dir);
            for (int i = 0; i < per_class; ++i) {
                std::uint64_t tseed =
                    derive_seed(spec.seed, tag, std::uint64_t(cls) * 1000003u + std::uint64_t(i));
                ImageU8 img = synth_tile(spec, cls, target, tseed, spec.tile_size);
                accumulate_histogram(img, hist[domain]);
                save_png(dir + "/" + padded("t", i, 4) + ".png", img);
            }
        }
    }

    double max_ks = 0.0;
    for (int ch = 0; ch < 3; ++ch)
        max_ks = std::max(max_ks, ks_distance(hist[0][ch], hist[1][ch]));
    if (max_ks < spec.min_ks_distance)
        throw ConfigError("synthetic domains are not separable: channel ks " +
                          format_double(max_ks) + " below floor " +
                          format_double(spec.min_ks_distance));
    log_event("synthetic_domains", {{"channel_ks", max_ks}});

    if (spec.patients > 0) {
        fs::create_directories(out_dir + "/patients");
        const std::vector<double> means = synthetic_gene_means(spec);

        Rng mrng(derive_seed(spec.seed, "mutsets"));
        const std::uint64_t all_mask = (spec.n_classes >= 64)
                                           ? ~std::uint64_t(0)
                                           : ((std::uint64_t(1) << spec.n_classes) - 1);
        std::vector<std::uint64_t> mut_mask(std::size_t(spec.mutations));
        for (auto& mask : mut_mask) {
            do {
                mask = 0;
                for (int c = 0; c < spec.n_classes; ++c)
                    if (mrng.uniform() < 0.5) mask |= std::uint64_t(1) << c;
            } while (mask == 0 || mask == all_mask);
        }

        TargetTable expr;
        expr.id_column = "patient_id";
        for (int g = 0; g < spec.genes; ++g) expr.columns.push_back(padded("g", g, 2));
        TargetTable mut;
        mut.id_column = "patient_id";
        for (int m = 0; m < spec.mutations; ++m) mut.columns.push_back(padded("m", m, 2));

        std::string manifest = "patient_id,image_path,mpp\n";
        const int grid = spec.patient_grid;
        for (int p = 0; p < spec.patients; ++p) {
            const std::string id = padded("P", p, 3);
            Rng prng(derive_seed(spec.seed, "patient", std::uint64_t(p)));

            std::vector<double> w(std::size_t(spec.n_classes));
            double wsum = 0.0;
            const int dominant = p % spec.n_classes;
            for (int c = 0; c < spec.n_classes; ++c) {
                w[c] = (c == dominant ? 2.5 : 0.0) + 0.5 * prng.uniform();
                wsum += w[c];
            }
            for (double& x : w) x /= wsum;

            std::vector<int> cell_class(std::size_t(grid) * grid);
            std::vector<double> mix(std::size_t(spec.n_classes), 0.0);
            for (auto& cell : cell_class) {
                double r = prng.uniform(), acc = 0.0;
                int chosen = spec.n_classes - 1;
                for (int c = 0; c < spec.n_classes; ++c) {
                    acc += w[c];
                    if (r < acc) {
                        chosen = c;
                        break;
                    }
                }
                cell = chosen;
                mix[chosen] += 1.0 / cell_class.size();
            }

            // Alternate resolutions so the tiler's rescale path gets exercised.
            const double mpp = (p % 2 == 0) ? 0.25 : 0.125;
            const int ppc = (p % 2 == 0) ? spec.tile_size : spec.tile_size * 2;
            ImageU8 full = make_image(grid * ppc, grid * ppc);
            for (int cy = 0; cy < grid; ++cy) {
                for (int cx = 0; cx < grid; ++cx) {
                    std::uint64_t cseed = derive_seed(
                        spec.seed, "patient_cell",
                        std::uint64_t(p) * 1000003u + std::uint64_t(cy) * grid + cx);
                    ImageU8 cell =
                        synth_tile(spec, cell_class[cy * grid + cx], true, cseed, ppc);
                    for (int y = 0; y < ppc; ++y)
                        std::copy_n(cell.row(y), std::size_t(ppc) * 3,
                                    full.row(cy * ppc + y) + std::size_t(cx) * ppc * 3);
                }
            }
            save_png(out_dir + "/patients/" + id + ".png", full);
            manifest += id + ",patients/" + id + ".png," + format_double(mpp) + "\n";

            Rng nrng(derive_seed(spec.seed, "targets", std::uint64_t(p)));
            expr.ids.push_back(id);
            for (int g = 0; g < spec.genes; ++g) {
                double value = nrng.normal(0.0, spec.expression_noise);
                for (int c = 0; c < spec.n_classes; ++c)
                    value += mix[c] * means[std::size_t(g) * spec.n_classes + c];
                expr.values.push_back(std::max(value, 0.0));
            }
            mut.ids.push_back(id);
            for (int m = 0; m < spec.mutations; ++m) {
                double mass = nrng.normal(0.0, spec.mutation_noise);
                for (int c = 0; c < spec.n_classes; ++c)
                    if (mut_mask[m] >> c & 1) mass += mix[c];
                mut.values.push_back(mass > 0.5 ? 1.0 : 0.0);
            }
        }
        write_file(outs.manifest_path, manifest);
        if (spec.genes > 0) save_target_table(outs.expression_path, expr);
        if (spec.mutations > 0) save_target_table(outs.mutation_path, mut);
    }
    return outs;
}

}  // namespace histofeat
