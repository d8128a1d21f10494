#pragma once

#include <functional>
#include <vector>

#include "ssnu/common.hpp"
#include "ssnu/fft.hpp"
#include "ssnu/grid.hpp"

namespace ssnu {

enum class VarTag { physical, similarity };

/// A real vector (or scalar) field on a periodic grid, stored as normalized
/// DFT coefficients per component. Physical samples are obtained on demand.
/// Mode m of axis index i carries wavenumber k = (pi/box) * freq(i).
class Field {
  public:
    Field() = default;
    Field(const Grid& g, int ncomp, VarTag tag = VarTag::similarity)
        : grid_(g), tag_(tag), hat_(ncomp, std::vector<Complex>(g.node_count(), Complex{0, 0})) {}

    static Field vector(const Grid& g, VarTag tag = VarTag::similarity) {
        return Field(g, g.dim(), tag);
    }
    static Field scalar(const Grid& g, VarTag tag = VarTag::similarity) {
        return Field(g, 1, tag);
    }

    /// Sample a function of physical coordinates into component c.
    void fill(int c, const std::function<Real(const std::vector<Real>&)>& fn);

    const Grid& grid() const { return grid_; }
    int ncomp() const { return static_cast<int>(hat_.size()); }
    VarTag tag() const { return tag_; }
    void set_tag(VarTag t) { tag_ = t; }

    std::vector<Complex>& hat(int c) { return hat_[c]; }
    const std::vector<Complex>& hat(int c) const { return hat_[c]; }

    /// Physical samples of component c (row-major over axis indices).
    std::vector<Real> physical(int c) const;
    void set_physical(int c, const std::vector<Real>& values);

    bool finite() const;
    void check_finite(const char* where) const;

    // linear algebra
    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(Real s);
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Real s, Field a) { return a *= s; }

    /// L2 inner product: integral over the box of the pointwise dot product.
    Real inner(const Field& o) const;
    Real l2_norm() const;

    /// Fraction of L2 mass inside the inner half-box (|x_a| <= box/2 per axis).
    Real mass_margin() const;

  private:
    Grid grid_;
    VarTag tag_ = VarTag::similarity;
    std::vector<std::vector<Complex>> hat_;
};

/// Walk all modes: cb(flat index, wavenumber vector k).
void for_each_mode(const Grid& g, const std::function<void(std::size_t, const std::array<Real, 3>&)>& cb);

}  // namespace ssnu
