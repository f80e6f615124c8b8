#include "histofeat/stain.hpp"

#include <algorithm>
#include <cmath>

#include "histofeat/common.hpp"
#include "histofeat/stats.hpp"

namespace histofeat {

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Cyclic Jacobi for a symmetric 3x3. Eigenvalues descending; eigenvector
// signs fixed so the largest-magnitude entry (lowest index on ties) is
// positive.
void symmetric_eigen3(Mat3 a, Vec3& values, Mat3& vectors) {
    Mat3 v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::fabs(a[0][1]) + std::fabs(a[0][2]) + std::fabs(a[1][2]);
        double diag = std::fabs(a[0][0]) + std::fabs(a[1][1]) + std::fabs(a[2][2]);
        if (off <= 1e-15 * std::max(diag, 1e-300)) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::fabs(a[p][q]) <= 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                Mat3 an = a;
                for (int k = 0; k < 3; ++k) {
                    an[k][p] = c * a[k][p] - s * a[k][q];
                    an[k][q] = s * a[k][p] + c * a[k][q];
                }
                a = an;
                an = a;
                for (int k = 0; k < 3; ++k) {
                    an[p][k] = c * a[p][k] - s * a[q][k];
                    an[q][k] = s * a[p][k] + c * a[q][k];
                }
                a = an;
                Mat3 vn = v;
                for (int k = 0; k < 3; ++k) {
                    vn[k][p] = c * v[k][p] - s * v[k][q];
                    vn[k][q] = s * v[k][p] + c * v[k][q];
                }
                v = vn;
            }
        }
    }
    std::array<int, 3> order{0, 1, 2};
    Vec3 lam{a[0][0], a[1][1], a[2][2]};
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (lam[i] != lam[j]) return lam[i] > lam[j];
        return i < j;
    });
    for (int c = 0; c < 3; ++c) {
        int src = order[c];
        values[c] = lam[src];
        int arg = 0;
        double best = -1.0;
        for (int r = 0; r < 3; ++r) {
            if (std::fabs(v[r][src]) > best) {
                best = std::fabs(v[r][src]);
                arg = r;
            }
        }
        double sign = v[arg][src] >= 0.0 ? 1.0 : -1.0;
        for (int r = 0; r < 3; ++r) vectors[r][c] = v[r][src] * sign;
    }
}

// Least squares against the 3x2 basis, negatives clamped to 0.
std::array<double, 2> solve_concentration(const StainBasis& basis, const double* od,
                                          const std::array<double, 3>& gram) {
    // gram = {S0.S0, S0.S1, S1.S1}
    double det = gram[0] * gram[2] - gram[1] * gram[1];
    double b0 = basis.vectors[0][0] * od[0] + basis.vectors[1][0] * od[1] + basis.vectors[2][0] * od[2];
    double b1 = basis.vectors[0][1] * od[0] + basis.vectors[1][1] * od[1] + basis.vectors[2][1] * od[2];
    double c0 = (gram[2] * b0 - gram[1] * b1) / det;
    double c1 = (gram[0] * b1 - gram[1] * b0) / det;
    return {std::max(0.0, c0), std::max(0.0, c1)};
}

std::array<double, 3> basis_gram(const StainBasis& basis) {
    double g00 = 0, g01 = 0, g11 = 0;
    for (int r = 0; r < 3; ++r) {
        g00 += basis.vectors[r][0] * basis.vectors[r][0];
        g01 += basis.vectors[r][0] * basis.vectors[r][1];
        g11 += basis.vectors[r][1] * basis.vectors[r][1];
    }
    double det = g00 * g11 - g01 * g01;
    if (det <= 1e-12) throw DegenerateStains("stain vectors are collinear");
    return {g00, g01, g11};
}

}  // namespace

OdImage rgb_to_od(const ImageU8& image, int io) {
    if (image.empty()) throw InvalidInput("rgb_to_od on empty image");
    if (io <= 0) throw InvalidInput("reference intensity must be positive");
    OdImage out;
    out.width = image.width;
    out.height = image.height;
    out.io = io;
    out.od.resize(image.pixels.size());
    // 256 possible channel values; precompute the lookup once.
    std::array<double, 256> lut;
    for (int v = 0; v < 256; ++v) {
        lut[v] = std::max(0.0, -std::log10((double(v) + 1.0) / double(io)));
    }
    for (std::size_t i = 0; i < image.pixels.size(); ++i) out.od[i] = lut[image.pixels[i]];
    return out;
}

StainBasis estimate_stain_basis(const OdImage& od, double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 50.0)) throw InvalidInput("alpha must lie in (0, 50)");
    if (!(beta > 0.0)) throw InvalidInput("beta must be positive");
    std::size_t n = od.pixel_count();

    std::vector<std::array<double, 3>> retained;
    retained.reserve(n / 4);
    for (std::size_t p = 0; p < n; ++p) {
        const double* px = od.od.data() + p * 3;
        if (px[0] >= beta && px[1] >= beta && px[2] >= beta)
            retained.push_back({px[0], px[1], px[2]});
    }
    if (retained.size() < 50)
        throw InsufficientTissue("only " + std::to_string(retained.size()) +
                                 " OD pixels above threshold, need 50");

    // Canonical order makes every reduction below independent of the
    // caller's pixel order, bit for bit.
    std::sort(retained.begin(), retained.end());

    double m = double(retained.size());
    Vec3 mu{0, 0, 0};
    for (const auto& x : retained)
        for (int c = 0; c < 3; ++c) mu[c] += x[c];
    for (int c = 0; c < 3; ++c) mu[c] /= m;
    Mat3 cov{};
    for (const auto& x : retained)
        for (int r = 0; r < 3; ++r)
            for (int c = r; c < 3; ++c) cov[r][c] += (x[r] - mu[r]) * (x[c] - mu[c]);
    for (int r = 0; r < 3; ++r)
        for (int c = r; c < 3; ++c) {
            cov[r][c] /= m;
            cov[c][r] = cov[r][c];
        }

    Vec3 lam;
    Mat3 eig;
    symmetric_eigen3(cov, lam, eig);
    if (lam[1] <= 1e-14 + lam[0] * 1e-9)
        throw DegenerateStains("OD cloud has rank < 2");

    std::vector<double> angles(retained.size());
    for (std::size_t i = 0; i < retained.size(); ++i) {
        const auto& x = retained[i];
        double p1 = x[0] * eig[0][0] + x[1] * eig[1][0] + x[2] * eig[2][0];
        double p2 = x[0] * eig[0][1] + x[1] * eig[1][1] + x[2] * eig[2][1];
        angles[i] = std::atan2(p2, p1);
    }
    std::sort(angles.begin(), angles.end());
    double phi_lo = percentile_sorted(angles, alpha);
    double phi_hi = percentile_sorted(angles, 100.0 - alpha);

    auto extreme_vector = [&](double phi) -> Vec3 {
        Vec3 v;
        for (int r = 0; r < 3; ++r)
            v[r] = std::cos(phi) * eig[r][0] + std::sin(phi) * eig[r][1];
        if (v[0] + v[1] + v[2] < 0.0)
            for (auto& e : v) e = -e;
        double norm = 0.0;
        for (auto& e : v) {
            e = std::max(0.0, e);
            norm += e * e;
        }
        norm = std::sqrt(norm);
        if (norm <= 1e-12) throw DegenerateStains("extreme stain direction collapsed to zero");
        for (auto& e : v) e /= norm;
        return v;
    };
    Vec3 v_lo = extreme_vector(phi_lo);
    Vec3 v_hi = extreme_vector(phi_hi);

    // Hematoxylin first: larger blue-channel coefficient.
    Vec3 h = v_lo, e = v_hi;
    if (v_hi[2] > v_lo[2]) std::swap(h, e);

    StainBasis basis;
    for (int r = 0; r < 3; ++r) {
        basis.vectors[r][0] = h[r];
        basis.vectors[r][1] = e[r];
    }

    auto gram = basis_gram(basis);
    std::vector<double> c0(n), c1(n);
    for (std::size_t p = 0; p < n; ++p) {
        auto c = solve_concentration(basis, od.od.data() + p * 3, gram);
        c0[p] = c[0];
        c1[p] = c[1];
    }
    std::sort(c0.begin(), c0.end());
    std::sort(c1.begin(), c1.end());
    basis.max_concentrations[0] = percentile_sorted(c0, 99.0);
    basis.max_concentrations[1] = percentile_sorted(c1, 99.0);
    if (basis.max_concentrations[0] <= 0.0 || basis.max_concentrations[1] <= 0.0)
        throw DegenerateStains("a stain has no concentration mass");
    return basis;
}

void validate_basis(const StainBasis& basis) {
    for (int c = 0; c < 2; ++c) {
        double norm = 0.0;
        for (int r = 0; r < 3; ++r) {
            if (basis.vectors[r][c] < 0.0) throw InvalidInput("stain vector entries must be >= 0");
            norm += basis.vectors[r][c] * basis.vectors[r][c];
        }
        if (std::fabs(std::sqrt(norm) - 1.0) > 1e-9)
            throw InvalidInput("stain vectors must have unit norm");
        if (!(basis.max_concentrations[c] > 0.0))
            throw InvalidInput("max concentrations must be positive");
    }
    if (basis.vectors[2][0] < basis.vectors[2][1] - 1e-12)
        throw InvalidInput("columns must be hematoxylin-first (larger blue coefficient)");
}

ImageU8 normalize_to_reference(const ImageU8& image, const StainBasis& source,
                               const StainBasis& reference, int io) {
    validate_basis(source);
    validate_basis(reference);
    OdImage od = rgb_to_od(image, io);
    auto gram = basis_gram(source);
    double scale0 = reference.max_concentrations[0] / source.max_concentrations[0];
    double scale1 = reference.max_concentrations[1] / source.max_concentrations[1];

    ImageU8 out;
    out.width = image.width;
    out.height = image.height;
    out.pixels.resize(image.pixels.size());
    std::size_t n = od.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        auto c = solve_concentration(source, od.od.data() + p * 3, gram);
        c[0] *= scale0;
        c[1] *= scale1;
        for (int r = 0; r < 3; ++r) {
            double od_new = reference.vectors[r][0] * c[0] + reference.vectors[r][1] * c[1];
            double v = double(io) * std::pow(10.0, -od_new) - 1.0;
            v = std::min(255.0, std::max(0.0, v));
            out.pixels[p * 3 + r] = std::uint8_t(std::lround(v));
        }
    }
    return out;
}

ImageU8 macenko_normalize(const ImageU8& image, const StainBasis& reference,
                          const MacenkoParams& params) {
    OdImage od = rgb_to_od(image, params.io);
    StainBasis source = estimate_stain_basis(od, params.alpha, params.beta);
    return normalize_to_reference(image, source, reference, params.io);
}

StainBasis default_reference_basis() {
    StainBasis b;
    // Canonical H&E optical-density directions.
    const Vec3 h{0.65, 0.70, 0.29};
    const Vec3 e{0.07, 0.99, 0.11};
    double hn = std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
    double en = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    for (int r = 0; r < 3; ++r) {
        b.vectors[r][0] = h[r] / hn;
        b.vectors[r][1] = e[r] / en;
    }
    b.max_concentrations = {1.9705, 1.0308};
    return b;
}

double angle_degrees(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 3; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    double cosv = dot / std::sqrt(na * nb);
    cosv = std::min(1.0, std::max(-1.0, cosv));
    return std::acos(cosv) * 180.0 / 3.14159265358979323846;
}

}  // namespace histofeat
