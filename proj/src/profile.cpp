#include "csdflow/profile.hpp"

#include "csdflow/discrete.hpp"
#include "csdflow/errors.hpp"
#include "csdflow/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace csdflow {

using std::numbers::pi;

std::string to_string(Topology t) { return t == Topology::Ring ? "ring" : "pole_to_pole"; }

Topology parse_topology(const std::string& s) {
    if (s == "ring" || s == "Ring") return Topology::Ring;
    if (s == "pole_to_pole" || s == "PoleToPole") return Topology::PoleToPole;
    fail(ErrorKind::DataFormat, "unknown topology '" + s + "'");
}

double sphere_measure(int k) {
    if (k == 1) return 2.0 * pi;
    if (k == 2) return 4.0 * pi;
    fail(ErrorKind::BadParameter, "symmetry rank must be 1 or 2");
}

// ---------------------------------------------------------------------------
// ProfileSurface

ProfileSurface ProfileSurface::from_trusted(std::vector<ProfileNode> nodes, int symmetry_rank,
                                             Topology topology) {
    if (symmetry_rank != 1 && symmetry_rank != 2)
        fail(ErrorKind::BadParameter, "symmetry rank must be 1 or 2");
    if (nodes.size() < 16) fail(ErrorKind::TooFewNodes, "profile needs at least 16 nodes");
    ProfileSurface s;
    s.nodes_ = std::move(nodes);
    s.k_ = symmetry_rank;
    s.topology_ = topology;
    return s;
}

std::size_t ProfileSurface::segments() const {
    return topology_ == Topology::Ring ? nodes_.size() : nodes_.size() - 1;
}

std::vector<double> ProfileSurface::gaps() const {
    std::vector<double> g(segments());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& a = nodes_[i];
        const auto& b = nodes_[(i + 1) % nodes_.size()];
        g[i] = std::hypot(b.r - a.r, b.z - a.z);
    }
    return g;
}

double ProfileSurface::polyline_length() const {
    double sum = 0.0;
    for (double g : gaps()) sum += g;
    return sum;
}

double ProfileSurface::spacing() const { return polyline_length() / static_cast<double>(segments()); }

double ProfileSurface::min_gap() const {
    const auto g = gaps();
    return *std::min_element(g.begin(), g.end());
}

std::vector<double> ProfileSurface::r_values() const {
    std::vector<double> v(nodes_.size());
    std::transform(nodes_.begin(), nodes_.end(), v.begin(), [](const ProfileNode& n) { return n.r; });
    return v;
}

std::vector<double> ProfileSurface::z_values() const {
    std::vector<double> v(nodes_.size());
    std::transform(nodes_.begin(), nodes_.end(), v.begin(), [](const ProfileNode& n) { return n.z; });
    return v;
}

BoundingBall make_ball(double r_c, double z_c, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorKind::BadParameter, "ball radius must be > 0");
    if (!(r_c >= 0.0) || !std::isfinite(z_c)) fail(ErrorKind::BadParameter, "ball center must have r >= 0");
    return {r_c, z_c, radius};
}

// ---------------------------------------------------------------------------
// Validation

namespace {

double orient2d(const ProfileNode& a, const ProfileNode& b, const ProfileNode& c) {
    return (b.r - a.r) * (c.z - a.z) - (b.z - a.z) * (c.r - a.r);
}

bool on_segment(const ProfileNode& a, const ProfileNode& b, const ProfileNode& p) {
    return std::min(a.r, b.r) <= p.r && p.r <= std::max(a.r, b.r) && std::min(a.z, b.z) <= p.z &&
           p.z <= std::max(a.z, b.z);
}

bool segments_intersect(const ProfileNode& p1, const ProfileNode& p2, const ProfileNode& q1,
                        const ProfileNode& q2) {
    if (std::max(p1.r, p2.r) < std::min(q1.r, q2.r) || std::max(q1.r, q2.r) < std::min(p1.r, p2.r) ||
        std::max(p1.z, p2.z) < std::min(q1.z, q2.z) || std::max(q1.z, q2.z) < std::min(p1.z, p2.z))
        return false;
    const double d1 = orient2d(q1, q2, p1);
    const double d2 = orient2d(q1, q2, p2);
    const double d3 = orient2d(p1, p2, q1);
    const double d4 = orient2d(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

// Derivative at points[0] of the interpolating polynomial through the first
// five (parameter, value) pairs.
double one_sided_derivative(std::span<const double> t, std::span<const double> f) {
    const std::size_t m = 5;
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double w;
        if (j == 0) {
            w = 0.0;
            for (std::size_t q = 1; q < m; ++q) w += 1.0 / (t[0] - t[q]);
        } else {
            double num = 1.0, den = 1.0;
            for (std::size_t q = 0; q < m; ++q) {
                if (q == j) continue;
                den *= t[j] - t[q];
                if (q != 0) num *= t[0] - t[q];
            }
            w = num / den;
        }
        d += w * f[j];
    }
    return d;
}

void check_axis(std::span<const ProfileNode> nodes, Topology topology, double scale) {
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(nodes[i].r) || !std::isfinite(nodes[i].z))
            fail(ErrorKind::DegenerateGeometry, "non-finite node coordinate");
        if (nodes[i].r < 0.0)
            fail(ErrorKind::AxisViolation, "node " + std::to_string(i) + " has r < 0");
    }
    const double tol = 1e-12 * scale;
    if (topology == Topology::PoleToPole) {
        if (nodes.front().r > tol || nodes.back().r > tol)
            fail(ErrorKind::AxisViolation, "pole-to-pole profile must start and end on the axis");
        for (std::size_t i = 1; i + 1 < n; ++i)
            if (nodes[i].r <= tol)
                fail(ErrorKind::AxisViolation, "interior node " + std::to_string(i) + " touches the axis");
    } else {
        for (std::size_t i = 0; i < n; ++i)
            if (nodes[i].r <= tol)
                fail(ErrorKind::AxisViolation, "ring node " + std::to_string(i) + " touches the axis");
    }
}

void check_pole_slopes(std::span<const ProfileNode> nodes, double ds) {
    const double tol = 10.0 * ds * ds;
    auto check_end = [&](bool north) {
        std::array<double, 5> t{}, r{}, z{};
        for (std::size_t j = 0; j < 5; ++j) {
            const std::size_t i = north ? nodes.size() - 1 - j : j;
            r[j] = nodes[i].r;
            z[j] = nodes[i].z;
            if (j > 0) {
                const std::size_t ip = north ? i + 1 : i - 1;
                t[j] = t[j - 1] + std::hypot(nodes[i].r - nodes[ip].r, nodes[i].z - nodes[ip].z);
            }
        }
        const double dr = one_sided_derivative(t, r);
        const double dz = one_sided_derivative(t, z);
        if (std::abs(dz) > tol || std::abs(std::abs(dr) - 1.0) > tol) {
            std::ostringstream os;
            os << (north ? "north" : "south") << " pole tangent (" << dr << ", " << dz
               << ") is not perpendicular to the axis";
            fail(ErrorKind::PoleSlopeError, os.str());
        }
    };
    check_end(false);
    check_end(true);
}

double signed_axis_area(std::span<const ProfileNode> nodes, Topology topology) {
    // Closed-loop integral of r dz; the axis segment closing a pole-to-pole
    // profile contributes nothing.
    double sum = 0.0;
    const std::size_t n = nodes.size();
    const std::size_t segs = topology == Topology::Ring ? n : n - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        const auto& a = nodes[i];
        const auto& b = nodes[(i + 1) % n];
        sum += 0.5 * (a.r + b.r) * (b.z - a.z);
    }
    return sum;
}

double bounding_scale(std::span<const ProfileNode> nodes) {
    double s = 0.0;
    for (const auto& p : nodes) s = std::max({s, std::abs(p.r), std::abs(p.z)});
    return std::max(s, 1e-300);
}

} // namespace

bool profile_self_intersects(std::span<const ProfileNode> nodes, Topology topology) {
    const std::size_t n = nodes.size();
    const std::size_t segs = topology == Topology::Ring ? n : n - 1;
    // Sweep over segments ordered by their lower z extent.
    struct Seg {
        double zlo, zhi;
        std::size_t i;
    };
    std::vector<Seg> order(segs);
    for (std::size_t i = 0; i < segs; ++i) {
        const double a = nodes[i].z, b = nodes[(i + 1) % n].z;
        order[i] = {std::min(a, b), std::max(a, b), i};
    }
    std::sort(order.begin(), order.end(), [](const Seg& a, const Seg& b) { return a.zlo < b.zlo || (a.zlo == b.zlo && a.i < b.i); });
    auto adjacent = [&](std::size_t i, std::size_t j) {
        const std::size_t d = i > j ? i - j : j - i;
        return d <= 1 || (topology == Topology::Ring && d == segs - 1);
    };
    for (std::size_t a = 0; a < segs; ++a) {
        const auto& sa = order[a];
        for (std::size_t b = a + 1; b < segs && order[b].zlo <= sa.zhi; ++b) {
            const std::size_t i = sa.i, j = order[b].i;
            if (adjacent(i, j)) continue;
            if (segments_intersect(nodes[i], nodes[(i + 1) % n], nodes[j], nodes[(j + 1) % n])) return true;
        }
    }
    return false;
}

void validate_profile(const ProfileSurface& s) {
    const auto& nodes = s.nodes();
    if (nodes.size() < 16) fail(ErrorKind::TooFewNodes, "profile needs at least 16 nodes");
    check_axis(nodes, s.topology(), bounding_scale(nodes));
    const double ds = s.spacing();
    for (double g : s.gaps())
        if (g < 0.5 * ds || g > 2.0 * ds)
            fail(ErrorKind::DegenerateGeometry, "node gap outside [0.5, 2] x nominal spacing");
    if (profile_self_intersects(nodes, s.topology()))
        fail(ErrorKind::SelfIntersection, "profile curve intersects itself");
    if (s.topology() == Topology::PoleToPole) check_pole_slopes(nodes, ds);
}

ProfileSurface build_profile(std::span<const ProfileNode> samples, int symmetry_rank,
                             Topology topology) {
    if (symmetry_rank != 1 && symmetry_rank != 2)
        fail(ErrorKind::BadParameter, "symmetry rank must be 1 or 2");
    std::vector<ProfileNode> nodes(samples.begin(), samples.end());
    if (topology == Topology::Ring && nodes.size() > 1) {
        const auto& a = nodes.front();
        const auto& b = nodes.back();
        if (std::hypot(a.r - b.r, a.z - b.z) <= 1e-12 * bounding_scale(nodes)) nodes.pop_back();
    }
    if (nodes.size() < 16) fail(ErrorKind::TooFewNodes, "profile needs at least 16 samples");
    const double scale = bounding_scale(nodes);
    check_axis(nodes, topology, scale);
    if (topology == Topology::PoleToPole) {
        nodes.front().r = 0.0;
        nodes.back().r = 0.0;
    }
    if (profile_self_intersects(nodes, topology))
        fail(ErrorKind::SelfIntersection, "profile curve intersects itself");
    if (signed_axis_area(nodes, topology) < 0.0) std::reverse(nodes.begin(), nodes.end());
    const auto raw = ProfileSurface::from_trusted(std::move(nodes), symmetry_rank, topology);
    if (topology == Topology::PoleToPole) check_pole_slopes(raw.nodes(), raw.spacing());
    auto out = resample_arclength(raw, raw.size());
    validate_profile(out);
    return out;
}

// ---------------------------------------------------------------------------
// Arc-length resampling

ProfileSurface resample_arclength(const ProfileSurface& s, std::size_t n_nodes) {
    if (n_nodes < 16) fail(ErrorKind::TooFewNodes, "resampling needs at least 16 nodes");
    const auto& nodes = s.nodes();
    const std::size_t n = nodes.size();
    std::vector<double> x, y;
    if (s.topology() == Topology::Ring) {
        for (const auto& p : nodes) {
            x.push_back(p.r);
            y.push_back(p.z);
        }
    } else {
        // Mirror the profile through the axis so the spline is periodic and
        // automatically satisfies r(pole) = 0, z'(pole) = 0.
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(nodes[i].r);
            y.push_back(nodes[i].z);
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            x.push_back(-nodes[i].r);
            y.push_back(nodes[i].z);
        }
    }
    const std::size_t used_segments = s.topology() == Topology::Ring ? n : n - 1;
    const ClosedCurveSpline spline(x, y, used_segments);
    std::vector<double> cum(used_segments + 1, 0.0);
    for (std::size_t i = 0; i < used_segments; ++i) cum[i + 1] = cum[i] + spline.segment_length(i);
    const double total = cum.back();

    const std::size_t out_segments = s.topology() == Topology::Ring ? n_nodes : n_nodes - 1;
    const double step = total / static_cast<double>(out_segments);
    std::vector<ProfileNode> out(n_nodes);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double target = step * static_cast<double>(j);
        while (seg + 1 < used_segments && cum[seg + 1] < target) ++seg;
        const double t = spline.invert(seg, target - cum[seg]);
        out[j] = {spline.x(seg, t), spline.y(seg, t)};
    }
    if (s.topology() == Topology::PoleToPole) {
        out.front() = {0.0, nodes.front().z};
        out.back() = {0.0, nodes.back().z};
    }
    return ProfileSurface::from_trusted(std::move(out), s.symmetry_rank(), s.topology());
}

ProfileSurface rescale(const ProfileSurface& s, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::BadParameter, "scale must be > 0");
    auto nodes = s.nodes();
    for (auto& p : nodes) {
        p.r *= lambda;
        p.z *= lambda;
    }
    return ProfileSurface::from_trusted(std::move(nodes), s.symmetry_rank(), s.topology());
}

// ---------------------------------------------------------------------------
// Measures

double area(const ProfileSurface& s) {
    const auto r = s.r_values();
    const auto z = s.z_values();
    const std::size_t n = r.size();
    std::vector<double> ru(n), zu(n);
    discrete::diff1(r, s.topology(), discrete::Parity::Odd, ru);
    discrete::diff1(z, s.topology(), discrete::Parity::Even, zu);
    const auto w = discrete::quadrature_weights(n, s.topology());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += w[i] * std::pow(r[i], s.symmetry_rank()) * std::hypot(ru[i], zu[i]);
    return sphere_measure(s.symmetry_rank()) * sum;
}

double volume(const ProfileSurface& s) {
    const auto r = s.r_values();
    const auto z = s.z_values();
    const std::size_t n = r.size();
    std::vector<double> zu(n);
    discrete::diff1(z, s.topology(), discrete::Parity::Even, zu);
    const auto w = discrete::quadrature_weights(n, s.topology());
    const int k = s.symmetry_rank();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * std::pow(r[i], k + 1) * zu[i];
    return sphere_measure(k) / (k + 1) * sum;
}

double diameter(const ProfileSurface& s) {
    const auto& nodes = s.nodes();
    double best = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i; j < nodes.size(); ++j) {
            const double dr = nodes[i].r + nodes[j].r;
            const double dz = nodes[i].z - nodes[j].z;
            best = std::max(best, dr * dr + dz * dz);
        }
    return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

using Curve = std::function<ProfileNode(double)>;

ProfileNode curve_derivative(const Curve& c, double t) {
    constexpr double h = 1e-3;
    const auto p1 = c(t + h), m1 = c(t - h), p2 = c(t + 2 * h), m2 = c(t - 2 * h);
    return {(8.0 * (p1.r - m1.r) - (p2.r - m2.r)) / (12.0 * h),
            (8.0 * (p1.z - m1.z) - (p2.z - m2.z)) / (12.0 * h)};
}

// Samples the curve c on [t0, t1] at n_out points equally spaced in arc length
// (Ring: n_out points over the closed loop, last point omitted).
std::vector<ProfileNode> sample_by_arclength(const Curve& c, double t0, double t1, std::size_t n_out,
                                             bool closed) {
    constexpr std::size_t panels = 4096;
    const double dt = (t1 - t0) / panels;
    auto speed = [&](double t) {
        const auto d = curve_derivative(c, t);
        return std::hypot(d.r, d.z);
    };
    static constexpr std::array<double, 5> gx = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                 0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> gw = {0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};
    auto gauss = [&](double a, double b) {
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double sum = 0.0;
        for (std::size_t q = 0; q < gx.size(); ++q) sum += gw[q] * speed(mid + half * gx[q]);
        return sum * half;
    };
    std::vector<double> cum(panels + 1, 0.0);
    for (std::size_t p = 0; p < panels; ++p) cum[p + 1] = cum[p] + gauss(t0 + p * dt, t0 + (p + 1) * dt);
    const double total = cum.back();
    const std::size_t segs = closed ? n_out : n_out - 1;
    std::vector<ProfileNode> out(n_out);
    std::size_t p = 0;
    for (std::size_t j = 0; j < n_out; ++j) {
        const double target = total * static_cast<double>(j) / static_cast<double>(segs);
        while (p + 1 < panels && cum[p + 1] < target) ++p;
        const double a = t0 + p * dt;
        double t = a + dt * (target - cum[p]) / std::max(cum[p + 1] - cum[p], 1e-300);
        for (int it = 0; it < 20; ++it) {
            const double f = cum[p] + gauss(a, t) - target;
            const double step = f / speed(t);
            t -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(t))) break;
        }
        out[j] = c(t);
    }
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::BadParameter, what);
}

} // namespace

PresetSpec parse_preset(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    PresetSpec spec;
    std::size_t expected = 0;
    if (name == "sphere") { spec.kind = PresetKind::Sphere; expected = 1; }
    else if (name == "torus") { spec.kind = PresetKind::Torus; expected = 2; }
    else if (name == "dumbbell") { spec.kind = PresetKind::Dumbbell; expected = 2; }
    else if (name == "perturbed_sphere") { spec.kind = PresetKind::PerturbedSphere; expected = 3; }
    else if (name == "lens") { spec.kind = PresetKind::Lens; expected = 1; }
    else fail(ErrorKind::ConfigParse, "unknown preset '" + name + "'");
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                spec.params.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                fail(ErrorKind::ConfigParse, "bad preset parameter '" + item + "'");
            }
        }
    }
    if (spec.params.size() != expected)
        fail(ErrorKind::ConfigParse, "preset '" + name + "' takes " + std::to_string(expected) +
                                         " parameter(s), got " + std::to_string(spec.params.size()));
    return spec;
}

std::string to_string(const PresetSpec& spec) {
    std::ostringstream os;
    switch (spec.kind) {
    case PresetKind::Sphere: os << "sphere"; break;
    case PresetKind::Torus: os << "torus"; break;
    case PresetKind::Dumbbell: os << "dumbbell"; break;
    case PresetKind::PerturbedSphere: os << "perturbed_sphere"; break;
    case PresetKind::Lens: os << "lens"; break;
    }
    for (std::size_t i = 0; i < spec.params.size(); ++i) os << (i == 0 ? ':' : ',') << spec.params[i];
    return os.str();
}

ProfileSurface preset(const PresetSpec& spec, int symmetry_rank, std::size_t n_nodes) {
    if (n_nodes < 16) fail(ErrorKind::TooFewNodes, "presets need at least 16 nodes");
    const auto& p = spec.params;
    auto finite = std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
    require(finite, "preset parameters must be finite");
    Curve curve;
    Topology topology = Topology::PoleToPole;
    double t0 = 0.0, t1 = pi;
    switch (spec.kind) {
    case PresetKind::Sphere: {
        require(p.size() == 1 && p[0] > 0.0, "sphere radius must be > 0");
        const double r0 = p[0];
        curve = [r0](double t) { return ProfileNode{r0 * std::sin(t), -r0 * std::cos(t)}; };
        break;
    }
    case PresetKind::Torus: {
        require(p.size() == 2 && p[1] > 0.0 && p[0] > p[1], "torus needs R > a > 0");
        const double R = p[0], a = p[1];
        curve = [R, a](double t) { return ProfileNode{R + a * std::cos(t), a * std::sin(t)}; };
        topology = Topology::Ring;
        t1 = 2.0 * pi;
        break;
    }
    case PresetKind::Dumbbell: {
        require(p.size() == 2 && p[0] > 0.0 && p[0] < 1.0, "dumbbell neck ratio must lie in (0, 1)");
        require(p[1] > 0.0, "dumbbell length must be > 0");
        // Unit bulbs joined by a Gaussian waist of radius q at z = 0. With
        // z = -l cos t the factor sin t sqrt(1 + cos^2 t) makes r^2 vanish to
        // first order at the poles, i.e. a smooth axis crossing.
        const double q = p[0], half = 0.5 * p[1], width = p[1] / 6.0;
        curve = [q, half, width](double t) {
            const double z = -half * std::cos(t);
            const double waist = 1.0 - (1.0 - q) * std::exp(-(z / width) * (z / width));
            const double c = std::cos(t);
            return ProfileNode{waist * std::sin(t) * std::sqrt(1.0 + c * c), z};
        };
        break;
    }
    case PresetKind::PerturbedSphere: {
        require(p.size() == 3 && p[0] > 0.0, "perturbed sphere radius must be > 0");
        require(p[1] > 0.0 && p[1] < 1.0, "perturbation amplitude must lie in (0, 1)");
        require(p[2] >= 1.0 && std::floor(p[2]) == p[2], "perturbation mode must be a positive integer");
        const double r0 = p[0], amp = p[1], mode = p[2];
        curve = [r0, amp, mode](double t) {
            const double rho = r0 * (1.0 + amp * std::cos(mode * t));
            return ProfileNode{rho * std::sin(t), -rho * std::cos(t)};
        };
        break;
    }
    case PresetKind::Lens: {
        require(p.size() == 1 && p[0] > 0.0 && p[0] <= 1.0, "lens aspect must lie in (0, 1]");
        const double aspect = p[0];
        curve = [aspect](double t) { return ProfileNode{std::sin(t), -aspect * std::cos(t)}; };
        break;
    }
    }
    auto nodes = sample_by_arclength(curve, t0, t1, n_nodes, topology == Topology::Ring);
    if (topology == Topology::PoleToPole) {
        nodes.front().r = 0.0;
        nodes.back().r = 0.0;
    }
    auto s = ProfileSurface::from_trusted(std::move(nodes), symmetry_rank, topology);
    validate_profile(s);
    return s;
}

} // namespace csdflow
