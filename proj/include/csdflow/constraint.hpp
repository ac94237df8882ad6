#pragma once

#include <memory>
#include <string>
#include <vector>

namespace csdflow {

enum class ConstraintKind { Zero, Const, Exp, Sin, Recip, NegT, Table };

std::string to_string(ConstraintKind kind);

// h(t) = scale * base(rate * t). Fresh constraints have rate = scale = 1;
// rescale_constraint only touches the two factors, so every kind keeps its
// closed form under the quartic rescaling.
class ConstraintFunction {
public:
    ConstraintFunction() = default;

    static ConstraintFunction zero();
    static ConstraintFunction constant(double c);
    static ConstraintFunction exp();
    static ConstraintFunction sin();
    static ConstraintFunction recip();
    static ConstraintFunction negt();
    // Piecewise linear through (times[i], values[i]); times strictly increasing.
    static ConstraintFunction table(std::vector<double> times, std::vector<double> values);

    ConstraintKind kind() const { return kind_; }
    double constant_value() const { return c_; }
    double rate() const { return rate_; }
    double scale() const { return scale_; }
    const std::vector<double>& table_times() const;
    const std::vector<double>& table_values() const;
    // Largest t at which evaluate() is defined (infinity except for tables).
    double t_max() const;

    ConstraintFunction with_scaling(double rate, double scale) const;

private:
    explicit ConstraintFunction(ConstraintKind kind) : kind_(kind) {}

    struct TableData {
        std::vector<double> t, h;
    };

    ConstraintKind kind_ = ConstraintKind::Zero;
    double c_ = 0.0;
    double rate_ = 1.0;
    double scale_ = 1.0;
    std::shared_ptr<const TableData> table_;
};

double evaluate(const ConstraintFunction& h, double t);
// sup |h| over [a, b].
double sup_bound(const ConstraintFunction& h, double a, double b);
// h~(t) = rho^3 h(rho^4 t).
ConstraintFunction rescale_constraint(const ConstraintFunction& h, double rho);

// "zero" | "const:<c>" | "exp" | "sin" | "recip" | "negt" | "table:<path.csv>"
ConstraintFunction parse_constraint(const std::string& text);
std::string describe(const ConstraintFunction& h);

} // namespace csdflow
