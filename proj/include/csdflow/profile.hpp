#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace csdflow {

enum class Topology {
    PoleToPole, // profile runs from the south pole to the north pole, surface ~ S^n
    Ring,       // closed profile loop with r > 0, surface ~ S^1 x S^k
};

std::string to_string(Topology t);
Topology parse_topology(const std::string& s);

struct ProfileNode {
    double r = 0.0;
    double z = 0.0;
};

// Closed axisymmetric hypersurface in R^{k+2}, stored as its generating curve
// in the (r, z) half-plane. The curve is oriented so that (z', -r') is the
// outer normal. Ring profiles store each node once; the closing segment from
// the last node back to the first is implicit.
class ProfileSurface {
public:
    ProfileSurface() = default;

    // Wraps nodes that already satisfy the invariants (presets, flow stages).
    // Only cheap structural checks run here; see validate_profile() for the
    // full set.
    static ProfileSurface from_trusted(std::vector<ProfileNode> nodes, int symmetry_rank,
                                       Topology topology);

    const std::vector<ProfileNode>& nodes() const { return nodes_; }
    const ProfileNode& operator[](std::size_t i) const { return nodes_[i]; }
    std::size_t size() const { return nodes_.size(); }
    int symmetry_rank() const { return k_; }
    int dimension() const { return k_ + 1; }
    Topology topology() const { return topology_; }

    // Number of polyline segments (N-1 for PoleToPole, N for Ring).
    std::size_t segments() const;
    double polyline_length() const;
    // Nominal arc-length step: polyline length / segments.
    double spacing() const;
    double min_gap() const;
    std::vector<double> gaps() const;

    std::vector<double> r_values() const;
    std::vector<double> z_values() const;

private:
    std::vector<ProfileNode> nodes_;
    int k_ = 1;
    Topology topology_ = Topology::PoleToPole;
};

// Ball B_radius(center) in R^{n+1}. The center is given by its orbit
// representative in the half-plane: distance r_c >= 0 from the axis at
// azimuth 0, and height z_c.
struct BoundingBall {
    double r_c = 0.0;
    double z_c = 0.0;
    double radius = 1.0;
};

BoundingBall make_ball(double r_c, double z_c, double radius);

// Full invariant check: node count, axis conditions, pole slopes, gap ratios
// and self-intersection. Throws csdflow::Error.
void validate_profile(const ProfileSurface& s);
bool profile_self_intersects(std::span<const ProfileNode> nodes, Topology topology);

ProfileSurface build_profile(std::span<const ProfileNode> samples, int symmetry_rank,
                             Topology topology);

enum class PresetKind { Sphere, Torus, Dumbbell, PerturbedSphere, Lens };

struct PresetSpec {
    PresetKind kind = PresetKind::Sphere;
    std::vector<double> params;
};

// "sphere:1", "torus:2,1", "dumbbell:0.15,6", "perturbed_sphere:1,0.05,3", "lens:0.5"
PresetSpec parse_preset(const std::string& text);
std::string to_string(const PresetSpec& spec);

constexpr std::size_t kDefaultNodes = 256;

ProfileSurface preset(const PresetSpec& spec, int symmetry_rank,
                      std::size_t n_nodes = kDefaultNodes);

ProfileSurface resample_arclength(const ProfileSurface& s, std::size_t n_nodes);
ProfileSurface rescale(const ProfileSurface& s, double lambda);

double area(const ProfileSurface& s);
double volume(const ProfileSurface& s);
// Largest distance between two points of the rotated surface.
double diameter(const ProfileSurface& s);

// |S^k|: 2 pi for k = 1, 4 pi for k = 2.
double sphere_measure(int k);

} // namespace csdflow
