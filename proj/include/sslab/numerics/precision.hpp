#ifndef SSLAB_NUMERICS_PRECISION_HPP
#define SSLAB_NUMERICS_PRECISION_HPP

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace sslab {

using mp_real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                              boost::multiprecision::et_off>;

template <class R>
using cplx = std::complex<R>;

/// Raised for malformed inputs and configuration problems.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure fails (divergence, underflow, branch loss).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class R>
inline constexpr bool is_mp_v = !std::is_floating_point_v<R>;

/// Working precision and tolerances. Immutable once built.
class PrecisionCtx {
public:
    PrecisionCtx(unsigned mantissa_bits = 192, double abs_tol = 1e-40, double rel_tol = 1e-40)
        : bits_(mantissa_bits), abs_tol_(abs_tol), rel_tol_(rel_tol) {
        if (bits_ < 64) throw ConfigError("mantissa_bits must be >= 64");
        const double floor_tol = std::ldexp(1.0, 8 - static_cast<int>(bits_));
        if (!(abs_tol_ > 0) || !(rel_tol_ > 0)) throw ConfigError("tolerances must be positive");
        if (abs_tol_ < floor_tol || rel_tol_ < floor_tol)
            throw ConfigError("tolerance below 2^(8-mantissa_bits) is not representable");
    }

    /// Tolerances a few bits above the roundoff floor of the given precision.
    static PrecisionCtx for_bits(unsigned bits) {
        double tol = std::ldexp(1.0, 24 - static_cast<int>(bits));
        return PrecisionCtx(bits, tol, tol);
    }

    unsigned mantissa_bits() const { return bits_; }
    double abs_tol() const { return abs_tol_; }
    double rel_tol() const { return rel_tol_; }
    bool hardware() const { return bits_ == 64; }

    PrecisionCtx with_tolerances(double abs_tol, double rel_tol) const {
        return PrecisionCtx(bits_, abs_tol, rel_tol);
    }

private:
    unsigned bits_;
    double abs_tol_;
    double rel_tol_;
};

inline unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// Sets the MPFR default precision for the lifetime of the object.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits) : saved_(mp_real::default_precision()) {
        mp_real::default_precision(bits_to_digits10(bits));
    }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;
    ~PrecisionScope() { mp_real::default_precision(saved_); }

private:
    unsigned saved_;
};

/// Runs f with a tag value of the real type matching ctx (long double for 64 bits, MPFR otherwise).
template <class F>
decltype(auto) dispatch_precision(const PrecisionCtx& ctx, F&& f) {
    if (ctx.hardware()) return f(static_cast<long double>(0));
    PrecisionScope scope(ctx.mantissa_bits());
    return f(mp_real(0));
}

template <class R>
R parse_real(const std::string& text) {
    if constexpr (is_mp_v<R>) {
        return R(text);
    } else {
        std::size_t pos = 0;
        long double v = std::stold(text, &pos);
        if (pos != text.size()) throw ConfigError("not a number: '" + text + "'");
        return static_cast<R>(v);
    }
}

template <class R>
R pi() {
    using std::acos;
    return acos(R(-1));
}

template <class R>
R epsilon_of() {
    if constexpr (is_mp_v<R>) {
        return std::numeric_limits<R>::epsilon();
    } else {
        return std::numeric_limits<R>::epsilon();
    }
}

template <class R>
bool is_finite(const R& x) {
    using std::isfinite;
    using boost::multiprecision::isfinite;
    return isfinite(x);
}

template <class R>
bool is_finite(const cplx<R>& z) {
    return is_finite(z.real()) && is_finite(z.imag());
}

template <class R>
double to_double(const R& x) {
    return static_cast<double>(x);
}

/// Scientific notation with a fixed number of significant digits (deterministic across runs).
template <class R>
std::string to_sci(const R& x, int digits = 20) {
    std::ostringstream os;
    if constexpr (is_mp_v<R>) {
        os << x.str(digits, std::ios::scientific);
    } else {
        os << std::scientific << std::setprecision(digits - 1) << x;
    }
    return os.str();
}

}  // namespace sslab

#endif
