#pragma once

#include "suscept/expr.hpp"
#include "suscept/map.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace suscept {

using cplx = std::complex<double>;

// A complex-valued observable on the interval, with an exact derivative when
// available and a rigorous sup bound used to certify series tails.
struct Observable {
    std::function<cplx(double)> f;
    std::function<cplx(double)> df; // empty when no exact derivative is known
    double sup = 0;                 // bound for |f| on the interval of interest
    cplx mean = 0;                  // integral against the invariant density, if computed
    bool mean_normalized = false;
    std::string label;

    cplx operator()(double x) const { return f(x); }
    bool has_derivative() const { return static_cast<bool>(df); }
};

Observable make_observable(const Expr& e, double lo, double hi,
                           std::string label = "");

// phi = psi - e^{i omega} * (psi o f). Coefficients built from this telescope
// under the rotated partial sums; the rotation constant is std::polar(1, omega)
// so tests can reproduce it bit for bit.
Observable make_coboundary(const Expr& psi, double omega, const UnimodalMap& map,
                           std::string label = "");

// Residuals of the weighted orbit sums that vanish for perturbations
// horizontal up to the given order.
struct HorizontalityRecord {
    std::size_t order = 0;
    std::vector<double> residuals; // one per vanishing order 0 .. order-1
};

// A C^2 vector-field direction X for the perturbed family f_t = f + t*(X o f).
// X must vanish at the left endpoint a so that f_t keeps f_t(a) = f_t(b) = a.
struct Perturbation {
    Expr X;
    Expr dX;
    double sup = 0;       // bound for |X| on [a, c1]
    double sup_deriv = 0; // bound for |X'| on [a, c1]
    std::optional<HorizontalityRecord> horizontal;
    std::string label;

    double operator()(double x) const { return X(x); }
    double deriv(double x) const { return dX(x); }
};

// Validates X(a) = 0 (within 1e-14 * scale) and precomputes bounds on the
// image interval [a, c1].
Perturbation make_perturbation(const Expr& e, const UnimodalMap& map,
                               std::string label = "");

} // namespace suscept
