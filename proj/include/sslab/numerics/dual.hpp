#ifndef SSLAB_NUMERICS_DUAL_HPP
#define SSLAB_NUMERICS_DUAL_HPP

namespace sslab {

/// First-order forward-mode derivative carrier: v + d*eps with eps^2 = 0.
template <class T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(const T& value) : v(value), d(T(0)) {}
    Dual(const T& value, const T& deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
};

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return Dual<T>(-a.v, -a.d); }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return Dual<T>(q, (a.d - q * b.d) / b.v);
}

}  // namespace sslab

#endif
