#include "ssnu/field.hpp"

#include <array>
#include <cmath>

namespace ssnu {

void for_each_mode(const Grid& g, const std::function<void(std::size_t, const std::array<Real, 3>&)>& cb) {
    const int n = g.n();
    const Real k0 = g.k0();
    std::array<Real, 3> k{0, 0, 0};
    if (g.dim() == 2) {
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            k[0] = k0 * g.freq(i);
            for (int j = 0; j < n; ++j, ++idx) {
                k[1] = k0 * g.freq(j);
                cb(idx, k);
            }
        }
    } else {
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            k[0] = k0 * g.freq(i);
            for (int j = 0; j < n; ++j) {
                k[1] = k0 * g.freq(j);
                for (int l = 0; l < n; ++l, ++idx) {
                    k[2] = k0 * g.freq(l);
                    cb(idx, k);
                }
            }
        }
    }
}

void Field::fill(int c, const std::function<Real(const std::vector<Real>&)>& fn) {
    const int n = grid_.n();
    std::vector<Real> vals(grid_.node_count());
    std::vector<Real> x(grid_.dim());
    if (grid_.dim() == 2) {
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            x[0] = grid_.coord(i);
            for (int j = 0; j < n; ++j, ++idx) {
                x[1] = grid_.coord(j);
                vals[idx] = fn(x);
            }
        }
    } else {
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            x[0] = grid_.coord(i);
            for (int j = 0; j < n; ++j) {
                x[1] = grid_.coord(j);
                for (int l = 0; l < n; ++l, ++idx) {
                    x[2] = grid_.coord(l);
                    vals[idx] = fn(x);
                }
            }
        }
    }
    set_physical(c, vals);
}

std::vector<Real> Field::physical(int c) const {
    std::vector<Complex> buf = hat_[c];
    fft::inverse(grid_, buf);
    std::vector<Real> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
    return out;
}

void Field::set_physical(int c, const std::vector<Real>& values) {
    if (values.size() != grid_.node_count()) throw FieldError("set_physical: size mismatch");
    std::vector<Complex> buf(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) buf[i] = Complex(values[i], 0);
    fft::forward(grid_, buf);
    hat_[c] = std::move(buf);
}

bool Field::finite() const {
    for (const auto& comp : hat_)
        for (const auto& z : comp)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

void Field::check_finite(const char* where) const {
    if (!finite()) throw FieldError(std::string(where) + ": non-finite field values");
}

Field& Field::operator+=(const Field& o) {
    if (grid_ != o.grid_ || ncomp() != o.ncomp()) throw GridMismatch("field +=: mismatch");
    for (int c = 0; c < ncomp(); ++c)
        for (std::size_t i = 0; i < hat_[c].size(); ++i) hat_[c][i] += o.hat_[c][i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    if (grid_ != o.grid_ || ncomp() != o.ncomp()) throw GridMismatch("field -=: mismatch");
    for (int c = 0; c < ncomp(); ++c)
        for (std::size_t i = 0; i < hat_[c].size(); ++i) hat_[c][i] -= o.hat_[c][i];
    return *this;
}

Field& Field::operator*=(Real s) {
    for (auto& comp : hat_)
        for (auto& z : comp) z *= s;
    return *this;
}

Real Field::inner(const Field& o) const {
    if (grid_ != o.grid_ || ncomp() != o.ncomp()) throw GridMismatch("field inner: mismatch");
    const Real vol = std::pow(2.0 * grid_.box(), grid_.dim());
    Real acc = 0;
    for (int c = 0; c < ncomp(); ++c)
        for (std::size_t i = 0; i < hat_[c].size(); ++i)
            acc += (hat_[c][i] * std::conj(o.hat_[c][i])).real();
    return vol * acc;
}

Real Field::l2_norm() const { return std::sqrt(std::max(Real(0), inner(*this))); }

Real Field::mass_margin() const {
    const int n = grid_.n();
    const Real half = grid_.box() / 2;
    Real inner_mass = 0, total = 0;
    for (int c = 0; c < ncomp(); ++c) {
        auto vals = physical(c);
        std::size_t idx = 0;
        if (grid_.dim() == 2) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j, ++idx) {
                    Real m = vals[idx] * vals[idx];
                    total += m;
                    if (std::abs(grid_.coord(i)) <= half && std::abs(grid_.coord(j)) <= half)
                        inner_mass += m;
                }
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l, ++idx) {
                        Real m = vals[idx] * vals[idx];
                        total += m;
                        if (std::abs(grid_.coord(i)) <= half && std::abs(grid_.coord(j)) <= half &&
                            std::abs(grid_.coord(l)) <= half)
                            inner_mass += m;
                    }
        }
    }
    return total > 0 ? inner_mass / total : 1.0;
}

}  // namespace ssnu
