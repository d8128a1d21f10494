#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "ssnu/common.hpp"

namespace ssnu {

/// Periodic box [-box, box)^dim sampled on n points per axis.
/// The fundamental wavenumber is k0 = pi/box; mode m carries k = m*k0.
class Grid {
  public:
    Grid() = default;
    Grid(int dim, int n, Real box, Real dealias_frac = 2.0 / 3.0)
        : dim_(dim), n_(n), box_(box), dealias_(dealias_frac) {
        if (dim != 2 && dim != 3) throw Error("grid dimension must be 2 or 3");
        if (n < 8 || (n & (n - 1)) != 0) throw Error("n must be a power of two >= 8");
        if (box <= 0) throw Error("box half-width must be positive");
        if (shell_count() < 3) throw Error("grid retains fewer than 3 dyadic shells");
    }

    int dim() const { return dim_; }
    int n() const { return n_; }
    Real box() const { return box_; }
    Real dealias_frac() const { return dealias_; }

    Real k0() const { return pi / box_; }
    Real dx() const { return 2.0 * box_ / n_; }
    std::size_t node_count() const {
        std::size_t c = 1;
        for (int a = 0; a < dim_; ++a) c *= static_cast<std::size_t>(n_);
        return c;
    }
    Real cell_volume() const { return std::pow(dx(), dim_); }

    /// Signed integer frequency of axis index i in [-n/2, n/2).
    int freq(int i) const { return i <= n_ / 2 ? i : i - n_; }

    /// Physical coordinate of axis index i, in [-box, box).
    Real coord(int i) const { return -box_ + i * dx(); }

    /// Largest |k| on the grid (corner mode).
    Real k_max() const { return k0() * (n_ / 2) * std::sqrt(static_cast<Real>(dim_)); }

    /// Index J of the last retained Littlewood-Paley shell: the smallest J
    /// with chi(|k|/2^{J+1}) == 1 for every grid mode, so that blocks
    /// -1..J form an exact partition of unity on band-limited fields.
    int shell_count() const {
        int J = 0;
        while (k_max() / std::pow(2.0, J + 1) > 0.75) ++J;
        return J;
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && box_ == o.box_ && dealias_ == o.dealias_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

  private:
    int dim_ = 0;
    int n_ = 0;
    Real box_ = 0;
    Real dealias_ = 2.0 / 3.0;
};

}  // namespace ssnu
