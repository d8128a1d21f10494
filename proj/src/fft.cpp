#include "ssnu/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace ssnu::fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex plan_mutex;
std::map<std::pair<int, int>, PlanPair>& plan_cache() {
    static std::map<std::pair<int, int>, PlanPair> cache;
    return cache;
}

// Plans are created once per (dim, n) with FFTW_ESTIMATE (deterministic)
// and executed via fftw_execute_dft on caller-owned buffers.
PlanPair get_plans(const Grid& g) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(g.dim(), g.n());
    auto it = plan_cache().find(key);
    if (it != plan_cache().end()) return it->second;

    std::vector<Complex> buf(g.node_count());
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    PlanPair pp;
    if (g.dim() == 2) {
        pp.fwd = fftw_plan_dft_2d(g.n(), g.n(), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        pp.inv = fftw_plan_dft_2d(g.n(), g.n(), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
        pp.fwd = fftw_plan_dft_3d(g.n(), g.n(), g.n(), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        pp.inv = fftw_plan_dft_3d(g.n(), g.n(), g.n(), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    plan_cache()[key] = pp;
    return pp;
}

}  // namespace

void forward(const Grid& g, std::vector<Complex>& a) {
    if (a.size() != g.node_count()) throw FieldError("fft: buffer size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_execute_dft(get_plans(g).fwd, p, p);
    const Real scale = 1.0 / static_cast<Real>(g.node_count());
    for (auto& z : a) z *= scale;
}

void inverse(const Grid& g, std::vector<Complex>& a) {
    if (a.size() != g.node_count()) throw FieldError("fft: buffer size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_execute_dft(get_plans(g).inv, p, p);
}

}  // namespace ssnu::fft
