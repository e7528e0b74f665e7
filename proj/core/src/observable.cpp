#include "suscept/observable.hpp"
#include "suscept/errors.hpp"

#include <cmath>

namespace suscept {

Observable make_observable(const Expr& e, double lo, double hi, std::string label) {
    Observable obs;
    const Expr de = e.derivative();
    obs.f = [e](double x) { return cplx(e(x), 0.0); };
    obs.df = [de](double x) { return cplx(de(x), 0.0); };
    obs.sup = e.sup_bound(lo, hi);
    obs.label = label.empty() ? e.str() : std::move(label);
    return obs;
}

Observable make_coboundary(const Expr& psi, double omega, const UnimodalMap& map,
                           std::string label) {
    Observable obs;
    const cplx rot = std::polar(1.0, omega);
    const Expr dpsi = psi.derivative();
    const UnimodalMap m = map; // value copy keeps the closure self-contained
    obs.f = [psi, rot, m](double x) { return cplx(psi(x), 0.0) - rot * psi(m.eval(x)); };
    obs.df = [psi, dpsi, rot, m](double x) {
        return cplx(dpsi(x), 0.0) - rot * dpsi(m.eval(x)) * m.deriv(x);
    };
    obs.sup = 2.0 * psi.sup_bound(map.a, map.b);
    obs.label = label.empty() ? ("coboundary(" + psi.str() + ")") : std::move(label);
    return obs;
}

Perturbation make_perturbation(const Expr& e, const UnimodalMap& map,
                               std::string label) {
    const double scale = std::max(1.0, map.b - map.a);
    if (std::abs(e(map.a)) > 1e-14 * scale)
        throw ConfigError("perturbation must vanish at the left endpoint: X(a) = " +
                          std::to_string(e(map.a)));
    Perturbation X;
    X.X = e;
    X.dX = e.derivative();
    X.sup = e.sup_bound(map.a, map.c1);
    X.sup_deriv = X.dX.sup_bound(map.a, map.c1);
    X.label = label.empty() ? e.str() : std::move(label);
    return X;
}

} // namespace suscept
