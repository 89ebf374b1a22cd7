#include "hlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "hlab/fft_detail.hpp"

namespace hlab {
namespace detail {

namespace {

// Plan cache. FFTW planning is not thread-safe; execution via
// fftw_execute_dft on distinct buffers is. Plans are created UNALIGNED so
// they can run on arbitrary heap buffers.
struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, int, int>, fftw_plan> plans;

    fftw_plan get(int d, int n, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_tuple(d, n, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        std::size_t sz = d == 1 ? n : static_cast<std::size_t>(n) * n;
        std::vector<cplx> a(sz), b(sz);
        auto* ap = reinterpret_cast<fftw_complex*>(a.data());
        auto* bp = reinterpret_cast<fftw_complex*>(b.data());
        int fsign = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan p = d == 1 ? fftw_plan_dft_1d(n, ap, bp, fsign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                             : fftw_plan_dft_2d(n, n, ap, bp, fsign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void dft(int d, int n, const cplx* in, cplx* out, int sign) {
    fftw_plan p = cache().get(d, n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

namespace {

// per-dimension index mapping with Nyquist split: returns up to two
// (target index, weight) pairs for a source index on an n-grid mapped
// into an m-grid, m >= n.
inline int map_count(int j, int n, int m, int tgt[2], double w[2]) {
    int xi = fft_freq(j, n);
    if (m > n && xi == -n / 2) {
        tgt[0] = m - n / 2;
        w[0] = 0.5;
        tgt[1] = n / 2;
        w[1] = 0.5;
        return 2;
    }
    tgt[0] = xi >= 0 ? xi : m + xi;
    w[0] = 1.0;
    return 1;
}

}  // namespace

std::vector<cplx> embed(const cplx* src, int d, int n, int m) {
    std::size_t out_sz = d == 1 ? m : static_cast<std::size_t>(m) * m;
    std::vector<cplx> out(out_sz, cplx{0.0, 0.0});
    if (d == 1) {
        for (int j = 0; j < n; ++j) {
            int tgt[2];
            double w[2];
            int c = map_count(j, n, m, tgt, w);
            for (int q = 0; q < c; ++q) out[tgt[q]] += w[q] * src[j];
        }
    } else {
        for (int j0 = 0; j0 < n; ++j0) {
            int t0[2];
            double w0[2];
            int c0 = map_count(j0, n, m, t0, w0);
            for (int j1 = 0; j1 < n; ++j1) {
                int t1[2];
                double w1[2];
                int c1 = map_count(j1, n, m, t1, w1);
                cplx v = src[static_cast<std::size_t>(j0) * n + j1];
                for (int q0 = 0; q0 < c0; ++q0)
                    for (int q1 = 0; q1 < c1; ++q1)
                        out[static_cast<std::size_t>(t0[q0]) * m + t1[q1]] += w0[q0] * w1[q1] * v;
            }
        }
    }
    return out;
}

std::vector<cplx> restrict_to(const cplx* src, int d, int m, int n) {
    std::size_t out_sz = d == 1 ? n : static_cast<std::size_t>(n) * n;
    std::vector<cplx> out(out_sz, cplx{0.0, 0.0});
    // gather: target index j (freq xi) pulls from source slots that embed()
    // would have written, merging the +-n/2 split back into one slot.
    auto sources = [&](int j, int srcs[2]) {
        int xi = fft_freq(j, n);
        if (m > n && xi == -n / 2) {
            srcs[0] = m - n / 2;
            srcs[1] = n / 2;
            return 2;
        }
        srcs[0] = xi >= 0 ? xi : m + xi;
        return 1;
    };
    if (d == 1) {
        for (int j = 0; j < n; ++j) {
            int s[2];
            int c = sources(j, s);
            cplx v{0.0, 0.0};
            for (int q = 0; q < c; ++q) v += src[s[q]];
            out[j] = v;
        }
    } else {
        for (int j0 = 0; j0 < n; ++j0) {
            int s0[2];
            int c0 = sources(j0, s0);
            for (int j1 = 0; j1 < n; ++j1) {
                int s1[2];
                int c1 = sources(j1, s1);
                cplx v{0.0, 0.0};
                for (int q0 = 0; q0 < c0; ++q0)
                    for (int q1 = 0; q1 < c1; ++q1) v += src[static_cast<std::size_t>(s0[q0]) * m + s1[q1]];
                out[static_cast<std::size_t>(j0) * n + j1] = v;
            }
        }
    }
    return out;
}

int next_fast_size(int v) {
    auto smooth = [](int x) {
        for (int p : {2, 3, 5})
            while (x % p == 0) x /= p;
        return x == 1;
    };
    while (!smooth(v)) ++v;
    return v;
}

}  // namespace detail

std::vector<double> to_physical(const SpectralField& f, int c, int refine) {
    if (refine < 1) throw validation_error("to_physical: refine must be >= 1");
    int n = f.grid.n;
    int m = n * refine;
    std::vector<cplx> spec = refine == 1 ? std::vector<cplx>(f.comp(c), f.comp(c) + f.size())
                                         : detail::embed(f.comp(c), f.grid.d, n, m);
    std::vector<cplx> phys(spec.size());
    detail::dft(f.grid.d, m, spec.data(), phys.data(), +1);
    std::vector<double> out(phys.size());
    for (std::size_t i = 0; i < phys.size(); ++i) out[i] = phys[i].real();
    return out;
}

std::vector<std::vector<double>> to_physical_all(const SpectralField& f, int refine) {
    std::vector<std::vector<double>> out(f.components);
    for (int c = 0; c < f.components; ++c) out[c] = to_physical(f, c, refine);
    return out;
}

std::vector<std::vector<double>> sampled_components(const SpectralField& f, int m) {
    if (m < f.grid.n) throw validation_error("sampled_components: m must be >= grid n");
    std::vector<std::vector<double>> out(f.components);
    for (int c = 0; c < f.components; ++c) {
        std::vector<cplx> spec = m == f.grid.n ? std::vector<cplx>(f.comp(c), f.comp(c) + f.size())
                                               : detail::embed(f.comp(c), f.grid.d, f.grid.n, m);
        std::vector<cplx> phys(spec.size());
        detail::dft(f.grid.d, m, spec.data(), phys.data(), +1);
        out[c].resize(phys.size());
        for (std::size_t i = 0; i < phys.size(); ++i) out[c][i] = phys[i].real();
    }
    return out;
}

SpectralField from_physical(const GridSpec& grid, int components, const std::vector<double>& values) {
    grid.validate();
    std::size_t sz = grid.size();
    if (values.size() != sz * components) throw validation_error("from_physical: size mismatch");
    SpectralField f(grid, components);
    std::vector<cplx> in(sz), out(sz);
    double scale = 1.0 / static_cast<double>(sz);
    for (int c = 0; c < components; ++c) {
        for (std::size_t i = 0; i < sz; ++i) in[i] = cplx{values[c * sz + i], 0.0};
        detail::dft(grid.d, grid.n, in.data(), out.data(), -1);
        for (std::size_t i = 0; i < sz; ++i) f.at(c, i) = out[i] * scale;
    }
    return f;
}

SpectralField outer_product(const SpectralField& a, const SpectralField& b, int out_n) {
    if (!(a.grid.d == b.grid.d)) throw validation_error("outer_product: dimension mismatch");
    int d = a.grid.d;
    // Padded size large enough that every kept mode of the product is
    // alias-free, including the boundary.
    int m = detail::next_fast_size(a.grid.n / 2 + b.grid.n / 2 + out_n / 2 + 1);
    std::size_t msz = d == 1 ? m : static_cast<std::size_t>(m) * m;

    auto phys_of = [&](const SpectralField& f, int c) {
        std::vector<cplx> spec = detail::embed(f.comp(c), d, f.grid.n, m);
        std::vector<cplx> phys(msz);
        detail::dft(d, m, spec.data(), phys.data(), +1);
        std::vector<double> re(msz);
        for (std::size_t i = 0; i < msz; ++i) re[i] = phys[i].real();
        return re;
    };

    std::vector<std::vector<double>> pa(a.components), pb(b.components);
    for (int c = 0; c < a.components; ++c) pa[c] = phys_of(a, c);
    for (int c = 0; c < b.components; ++c) pb[c] = phys_of(b, c);

    GridSpec og{d, out_n};
    SpectralField result(og, a.components * b.components);
    std::vector<cplx> prod(msz), spec(msz);
    double scale = 1.0 / static_cast<double>(msz);
    for (int i = 0; i < a.components; ++i) {
        for (int j = 0; j < b.components; ++j) {
            for (std::size_t q = 0; q < msz; ++q) prod[q] = cplx{pa[i][q] * pb[j][q], 0.0};
            detail::dft(d, m, prod.data(), spec.data(), -1);
            for (std::size_t q = 0; q < msz; ++q) spec[q] *= scale;
            auto cut = detail::restrict_to(spec.data(), d, m, out_n);
            std::copy(cut.begin(), cut.end(), result.comp(i * b.components + j));
        }
    }
    return result;
}

}  // namespace hlab
