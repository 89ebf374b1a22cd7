#include "hlab/field.hpp"

#include <cmath>

#include "hlab/fft_detail.hpp"

namespace hlab {

namespace {
void check_compat(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid == b.grid) || a.components != b.components)
        throw validation_error("field op: incompatible grids or component counts");
}
}  // namespace

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    check_compat(a, b);
    SpectralField r = a;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] += b.coeffs[i];
    return r;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    check_compat(a, b);
    SpectralField r = a;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] -= b.coeffs[i];
    return r;
}

SpectralField operator*(double s, const SpectralField& f) {
    SpectralField r = f;
    for (auto& c : r.coeffs) c *= s;
    return r;
}

void axpy(SpectralField& y, double a, const SpectralField& x) {
    check_compat(y, x);
    for (std::size_t i = 0; i < y.coeffs.size(); ++i) y.coeffs[i] += a * x.coeffs[i];
}

double l2_coeff_norm(const SpectralField& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs) s += std::norm(c);
    return std::sqrt(s);
}

double energy(const SpectralField& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs) s += std::norm(c);
    return 0.5 * s;
}

double hermitian_defect(const SpectralField& f) {
    double worst = 0.0;
    std::size_t sz = f.size();
    int n = f.grid.n;
    for (int c = 0; c < f.components; ++c) {
        const cplx* a = f.comp(c);
        for (std::size_t idx = 0; idx < sz; ++idx) {
            std::size_t midx;
            if (f.grid.d == 1) {
                int j = static_cast<int>(idx);
                midx = static_cast<std::size_t>((n - j) % n);
            } else {
                int j0 = static_cast<int>(idx) / n;
                int j1 = static_cast<int>(idx) % n;
                midx = static_cast<std::size_t>((n - j0) % n) * n + (n - j1) % n;
            }
            worst = std::max(worst, std::abs(a[midx] - std::conj(a[idx])));
        }
    }
    return worst;
}

double divergence_defect(const SpectralField& f) {
    if (f.components != f.grid.d) throw validation_error("divergence_defect: expects a d-component vector field");
    double norm = l2_coeff_norm(f);
    if (norm == 0.0) return 0.0;
    double worst = 0.0;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(f.grid, idx);
        cplx s{0.0, 0.0};
        for (int j = 0; j < f.grid.d; ++j) s += cplx{0.0, 2.0 * M_PI * xi[j]} * f.at(j, idx);
        worst = std::max(worst, std::abs(s));
    }
    return worst / norm;
}

bool has_nan(const SpectralField& f) {
    for (const auto& c : f.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return true;
    return false;
}

std::size_t active_modes(const SpectralField& f) {
    std::size_t count = 0, sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        for (int c = 0; c < f.components; ++c) {
            if (f.at(c, idx) != cplx{0.0, 0.0}) {
                ++count;
                break;
            }
        }
    }
    return count;
}

SpectralField gradient(const SpectralField& f) {
    int d = f.grid.d;
    SpectralField g(f.grid, f.components * d);
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(f.grid, idx);
        for (int c = 0; c < f.components; ++c) {
            cplx v = f.at(c, idx);
            for (int j = 0; j < d; ++j) g.at(c * d + j, idx) = cplx{0.0, 2.0 * M_PI * xi[j]} * v;
        }
    }
    return g;
}

SpectralField divergence(const SpectralField& f) {
    int d = f.grid.d;
    if (f.components != d && f.components != d * d)
        throw validation_error("divergence: requires a vector (d) or tensor (d*d) field");
    int out_comps = f.components == d ? 1 : d;
    SpectralField g(f.grid, out_comps);
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(f.grid, idx);
        for (int i = 0; i < out_comps; ++i) {
            cplx s{0.0, 0.0};
            for (int j = 0; j < d; ++j) s += cplx{0.0, 2.0 * M_PI * xi[j]} * f.at(i * d + j, idx);
            g.at(i, idx) = s;
        }
    }
    return g;
}

SpectralField laplacian(const SpectralField& f) {
    SpectralField g = f;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(f.grid, idx);
        double sym = -4.0 * M_PI * M_PI * freq_norm2(xi);
        for (int c = 0; c < f.components; ++c) g.at(c, idx) = sym * f.at(c, idx);
    }
    return g;
}

SpectralField regrid(const SpectralField& f, int new_n) {
    if (new_n == f.grid.n) return f;
    GridSpec ng{f.grid.d, new_n};
    SpectralField out(ng, f.components);
    for (int c = 0; c < f.components; ++c) {
        std::vector<cplx> moved = new_n > f.grid.n ? detail::embed(f.comp(c), f.grid.d, f.grid.n, new_n)
                                                   : detail::restrict_to(f.comp(c), f.grid.d, f.grid.n, new_n);
        std::copy(moved.begin(), moved.end(), out.comp(c));
    }
    return out;
}

}  // namespace hlab
