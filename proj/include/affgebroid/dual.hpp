#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> carries a second
// derivative along a pair of seed directions.

#include <cmath>

namespace affgebroid {

template <typename T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(double c) : v(c), d(0.0) {}
    Dual(T value, T deriv) : v(value), d(deriv) {}
};

inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x) { return primal(x.v); }

template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <typename T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

template <typename T>
Dual<T> sin(const Dual<T>& a) {
    using std::cos;
    using std::sin;
    return {sin(a.v), cos(a.v) * a.d};
}
template <typename T>
Dual<T> cos(const Dual<T>& a) {
    using std::cos;
    using std::sin;
    return {cos(a.v), -sin(a.v) * a.d};
}
template <typename T>
Dual<T> tan(const Dual<T>& a) {
    using std::tan;
    T t = tan(a.v);
    return {t, (T(1.0) + t * t) * a.d};
}
template <typename T>
Dual<T> exp(const Dual<T>& a) {
    using std::exp;
    T e = exp(a.v);
    return {e, e * a.d};
}
template <typename T>
Dual<T> log(const Dual<T>& a) {
    using std::log;
    return {log(a.v), a.d / a.v};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    T s = sqrt(a.v);
    return {s, a.d / (T(2.0) * s)};
}
template <typename T>
Dual<T> sinh(const Dual<T>& a) {
    using std::cosh;
    using std::sinh;
    return {sinh(a.v), cosh(a.v) * a.d};
}
template <typename T>
Dual<T> cosh(const Dual<T>& a) {
    using std::cosh;
    using std::sinh;
    return {cosh(a.v), sinh(a.v) * a.d};
}
template <typename T>
Dual<T> tanh(const Dual<T>& a) {
    using std::tanh;
    T t = tanh(a.v);
    return {t, (T(1.0) - t * t) * a.d};
}

/// Integer powers use repeated multiplication so that negative bases stay
/// well defined.
template <typename T>
T ipow(const T& a, int k) {
    if (k < 0) return T(1.0) / ipow(a, -k);
    T result(1.0);
    T base = a;
    while (k > 0) {
        if (k & 1) result = result * base;
        base = base * base;
        k >>= 1;
    }
    return result;
}

template <typename T>
Dual<T> pow(const Dual<T>& a, double c) {
    using std::pow;
    return {pow(a.v, c), T(c) * pow(a.v, c - 1.0) * a.d};
}

template <typename T>
Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
    using std::log;
    return exp(b * log(a));
}

}  // namespace affgebroid
