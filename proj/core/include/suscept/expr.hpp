#pragma once

#include <string>
#include <vector>

namespace suscept {

// A fixed safe grammar for scenario observables and perturbations: sums of
// polynomial and trigonometric monomials,
//
//   expr    := term (('+'|'-') term)*
//   term    := number ['*' primary] | primary
//   primary := 'x' ['^' uint] | ('sin'|'cos') '(' [number '*'] 'x' [('+'|'-') number] ')'
//
// with 'pi' accepted wherever a number is. Every expression carries an exact
// derivative and a rigorous sup bound on an interval, so series tails built
// from these coefficients are certified rather than sampled.
class Expr {
public:
    enum class Kind { Poly, Sin, Cos };
    struct Term {
        Kind kind = Kind::Poly;
        double coeff = 0;
        int power = 0;    // Poly: coeff * x^power
        double freq = 0;  // Sin/Cos: coeff * sin(freq*x + phase)
        double phase = 0;
    };

    Expr() = default;
    explicit Expr(std::vector<Term> terms) : terms_(std::move(terms)) {}

    static Expr parse(const std::string& text);
    static Expr constant(double v);

    double operator()(double x) const;
    Expr derivative() const;
    // sum of per-term bounds: |coeff| * max(|lo|,|hi|)^power for monomials,
    // |coeff| for trig terms
    double sup_bound(double lo, double hi) const;

    Expr operator+(const Expr& other) const;
    Expr scaled(double factor) const;
    Expr shifted(double constant) const; // adds a constant term

    const std::vector<Term>& terms() const { return terms_; }
    std::string str() const;

private:
    std::vector<Term> terms_;
};

} // namespace suscept
