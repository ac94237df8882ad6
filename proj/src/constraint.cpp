#include "csdflow/constraint.hpp"

#include "csdflow/errors.hpp"
#include "csdflow/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace csdflow {

std::string to_string(ConstraintKind kind) {
    switch (kind) {
    case ConstraintKind::Zero: return "zero";
    case ConstraintKind::Const: return "const";
    case ConstraintKind::Exp: return "exp";
    case ConstraintKind::Sin: return "sin";
    case ConstraintKind::Recip: return "recip";
    case ConstraintKind::NegT: return "negt";
    case ConstraintKind::Table: return "table";
    }
    return "unknown";
}

ConstraintFunction ConstraintFunction::zero() { return ConstraintFunction(ConstraintKind::Zero); }

ConstraintFunction ConstraintFunction::constant(double c) {
    if (!std::isfinite(c)) fail(ErrorKind::BadParameter, "constant constraint must be finite");
    ConstraintFunction h(ConstraintKind::Const);
    h.c_ = c;
    return h;
}

ConstraintFunction ConstraintFunction::exp() { return ConstraintFunction(ConstraintKind::Exp); }
ConstraintFunction ConstraintFunction::sin() { return ConstraintFunction(ConstraintKind::Sin); }
ConstraintFunction ConstraintFunction::recip() { return ConstraintFunction(ConstraintKind::Recip); }
ConstraintFunction ConstraintFunction::negt() { return ConstraintFunction(ConstraintKind::NegT); }

ConstraintFunction ConstraintFunction::table(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2)
        fail(ErrorKind::BadParameter, "table constraint needs at least two (t, h) samples");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
            fail(ErrorKind::BadParameter, "table constraint samples must be finite");
        if (i > 0 && !(times[i] > times[i - 1]))
            fail(ErrorKind::BadParameter, "table constraint times must increase strictly");
    }
    if (times.front() < 0.0) fail(ErrorKind::BadParameter, "table constraint times must be >= 0");
    ConstraintFunction h(ConstraintKind::Table);
    h.table_ = std::make_shared<const TableData>(TableData{std::move(times), std::move(values)});
    return h;
}

const std::vector<double>& ConstraintFunction::table_times() const {
    static const std::vector<double> empty;
    return table_ ? table_->t : empty;
}

const std::vector<double>& ConstraintFunction::table_values() const {
    static const std::vector<double> empty;
    return table_ ? table_->h : empty;
}

double ConstraintFunction::t_max() const {
    if (kind_ != ConstraintKind::Table) return std::numeric_limits<double>::infinity();
    return table_->t.back() / rate_;
}

ConstraintFunction ConstraintFunction::with_scaling(double rate, double scale) const {
    ConstraintFunction h = *this;
    h.rate_ = rate_ * rate;
    h.scale_ = scale_ * scale;
    return h;
}

namespace {

double table_at(const std::vector<double>& t, const std::vector<double>& v, double x) {
    if (x < t.front() || x > t.back()) fail(ErrorKind::OutOfRange, "time outside the constraint table");
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.end()) return v.back();
    const std::size_t j = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
    return v[j - 1] + w * (v[j] - v[j - 1]);
}

// base(x) for the unscaled kinds.
double base_value(const ConstraintFunction& h, double x) {
    switch (h.kind()) {
    case ConstraintKind::Zero: return 0.0;
    case ConstraintKind::Const: return h.constant_value();
    case ConstraintKind::Exp: return std::exp(x);
    case ConstraintKind::Sin: return std::sin(x);
    case ConstraintKind::Recip: return 1.0 / (1.0 + x);
    case ConstraintKind::NegT: return -x;
    case ConstraintKind::Table: return table_at(h.table_times(), h.table_values(), x);
    }
    return 0.0;
}

// sup |base| over [a, b].
double base_sup(const ConstraintFunction& h, double a, double b) {
    switch (h.kind()) {
    case ConstraintKind::Zero: return 0.0;
    case ConstraintKind::Const: return std::abs(h.constant_value());
    case ConstraintKind::Exp: return std::exp(b);
    case ConstraintKind::Sin: {
        // |sin| peaks at pi/2 + j pi.
        const double j = std::ceil((a - std::numbers::pi / 2) / std::numbers::pi);
        if (std::numbers::pi / 2 + j * std::numbers::pi <= b) return 1.0;
        return std::max(std::abs(std::sin(a)), std::abs(std::sin(b)));
    }
    case ConstraintKind::Recip: return 1.0 / (1.0 + a);
    case ConstraintKind::NegT: return b;
    case ConstraintKind::Table: {
        const auto& t = h.table_times();
        const auto& v = h.table_values();
        double m = std::max(std::abs(table_at(t, v, a)), std::abs(table_at(t, v, b)));
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] > a && t[i] < b) m = std::max(m, std::abs(v[i]));
        return m;
    }
    }
    return 0.0;
}

} // namespace

double evaluate(const ConstraintFunction& h, double t) {
    if (!(t >= 0.0)) fail(ErrorKind::OutOfRange, "constraint evaluated at negative time");
    if (h.kind() == ConstraintKind::Zero) return 0.0;
    return h.scale() * base_value(h, h.rate() * t);
}

double sup_bound(const ConstraintFunction& h, double a, double b) {
    if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b))
        fail(ErrorKind::OutOfRange, "sup_bound needs 0 <= a <= b < infinity");
    if (h.kind() == ConstraintKind::Zero) return 0.0;
    return std::abs(h.scale()) * base_sup(h, h.rate() * a, h.rate() * b);
}

ConstraintFunction rescale_constraint(const ConstraintFunction& h, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) fail(ErrorKind::BadParameter, "rescale factor must be positive");
    if (h.kind() == ConstraintKind::Zero) return h;
    const double rho2 = rho * rho;
    if (h.kind() == ConstraintKind::Const) return ConstraintFunction::constant(h.constant_value() * h.scale() * rho * rho2);
    return h.with_scaling(rho2 * rho2, rho * rho2);
}

ConstraintFunction parse_constraint(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    auto no_arg = [&](ConstraintFunction h) {
        if (colon != std::string::npos) fail(ErrorKind::ConfigParse, "constraint '" + name + "' takes no argument");
        return h;
    };
    if (name == "zero") return no_arg(ConstraintFunction::zero());
    if (name == "exp") return no_arg(ConstraintFunction::exp());
    if (name == "sin") return no_arg(ConstraintFunction::sin());
    if (name == "recip") return no_arg(ConstraintFunction::recip());
    if (name == "negt") return no_arg(ConstraintFunction::negt());
    if (name == "const") {
        if (arg.empty()) fail(ErrorKind::ConfigParse, "const constraint needs a value, e.g. const:1.5");
        return ConstraintFunction::constant(textio::parse_double(arg, "constraint constant"));
    }
    if (name == "table") {
        if (arg.empty()) fail(ErrorKind::ConfigParse, "table constraint needs a CSV path");
        const auto csv = textio::read_csv(arg, {"t", "h"});
        try {
            return ConstraintFunction::table(csv.columns[0], csv.columns[1]);
        } catch (const Error& e) {
            fail(ErrorKind::DataFormat, arg + ": " + e.what());
        }
    }
    fail(ErrorKind::ConfigParse, "unknown constraint '" + text + "'");
}

std::string describe(const ConstraintFunction& h) {
    std::string base = to_string(h.kind());
    if (h.kind() == ConstraintKind::Const) return base + ":" + textio::format_double(h.constant_value());
    if (h.rate() == 1.0 && h.scale() == 1.0) return base;
    return textio::format_double(h.scale()) + "*" + base + "(" + textio::format_double(h.rate()) + "*t)";
}

} // namespace csdflow
