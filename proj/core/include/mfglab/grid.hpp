#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mfglab {

/// Rectangular prism a < x1 < b, -B_i < x_i < B_i (i >= 2), times (0, T).
struct Prism {
    double a = 1.0;
    double b = 2.0;
    std::vector<double> half_widths;  // B_2 .. B_n
    double T = 1.0;

    std::size_t dim() const { return 1 + half_widths.size(); }
    double lower(std::size_t axis) const { return axis == 0 ? a : -half_widths[axis - 1]; }
    double upper(std::size_t axis) const { return axis == 0 ? b : half_widths[axis - 1]; }
    double length(std::size_t axis) const { return upper(axis) - lower(axis); }
    /// Measure of the transverse cross-section; 1 when n = 1 (empty product).
    double transverse_measure() const;
    double measure() const { return (b - a) * transverse_measure(); }
    void validate() const;

    bool operator==(const Prism&) const = default;
};

enum class Side { Lower, Upper };

/// A lateral face: Gamma_{axis+1}^- (Side::Lower) or Gamma_{axis+1}^+ (Side::Upper).
struct Face {
    std::size_t axis = 0;
    Side side = Side::Upper;

    bool operator==(const Face&) const = default;
};

inline constexpr Face kGamma1Plus{0, Side::Upper};
inline constexpr Face kGamma1Minus{0, Side::Lower};

std::string to_string(const Face& face);

/// Tensor-product space-time mesh. Spatial axis 0 (x1) is the fastest index,
/// time is the slowest.
class Grid {
public:
    Grid(Prism prism, std::vector<std::size_t> nx, std::size_t nt);

    const Prism& prism() const { return prism_; }
    std::size_t dim() const { return nx_.size(); }
    std::size_t nx(std::size_t axis) const { return nx_[axis]; }
    const std::vector<std::size_t>& nx() const { return nx_; }
    std::size_t nt() const { return nt_; }
    double h(std::size_t axis) const { return h_[axis]; }
    const std::vector<double>& h() const { return h_; }
    double tau() const { return tau_; }
    double T() const { return prism_.T; }

    double x(std::size_t axis, std::size_t i) const {
        return i + 1 == nx_[axis] ? prism_.upper(axis) : prism_.lower(axis) + static_cast<double>(i) * h_[axis];
    }
    double t(std::size_t level) const {
        if (level + 1 == nt_) return prism_.T;
        if (2 * level + 1 == nt_) return 0.5 * prism_.T;
        return static_cast<double>(level) * tau_;
    }

    std::size_t space_size() const { return space_size_; }
    std::size_t size() const { return space_size_ * nt_; }
    std::size_t stride(std::size_t axis) const { return strides_[axis]; }

    /// Index of the time level t0 = T/2.
    std::size_t mid_level() const { return (nt_ - 1) / 2; }
    /// Time level of t; throws when t is not a grid level.
    std::size_t level_of(double t) const;

    std::vector<std::size_t> space_dims() const { return nx_; }
    std::vector<std::size_t> dims() const;

    std::size_t axis_index(std::size_t spatial, std::size_t axis) const {
        return (spatial / strides_[axis]) % nx_[axis];
    }
    void coords(std::size_t spatial, std::span<double> out) const;
    bool on_boundary(std::size_t spatial) const;

    std::vector<Face> faces() const;
    /// Spatial indices of the nodes of a face, in face order (remaining axes, lowest fastest).
    std::vector<std::size_t> face_nodes(const Face& face) const;
    /// Point counts of the tangential axes of a face (empty for n = 1).
    std::vector<std::size_t> face_dims(const Face& face) const;
    std::vector<std::size_t> tangential_axes(const Face& face) const;

    bool operator==(const Grid& other) const {
        return prism_ == other.prism_ && nx_ == other.nx_ && nt_ == other.nt_;
    }

private:
    Prism prism_;
    std::vector<std::size_t> nx_;
    std::size_t nt_;
    std::vector<double> h_;
    double tau_;
    std::vector<std::size_t> strides_;
    std::size_t space_size_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Validated grid construction: every count >= 5, nt odd so that T/2 is a level.
GridPtr make_grid(const Prism& prism, std::vector<std::size_t> nx, std::size_t nt);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

using SpaceTimeFunction = std::function<double(std::span<const double> x, double t)>;
using SpaceFunction = std::function<double(std::span<const double> x)>;

class SpaceField;

/// Scalar samples on every space-time node. Immutable; all samples finite.
class Field {
public:
    Field(GridPtr grid, std::vector<double> values);

    static Field constant(GridPtr grid, double value);
    static Field zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }
    static Field sample(GridPtr grid, const SpaceTimeFunction& fn);
    /// Time-constant field carrying the samples of `space` on every level.
    static Field broadcast(const SpaceField& space);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator()(std::size_t spatial, std::size_t level) const {
        return values_[level * grid_->space_size() + spatial];
    }
    std::span<const double> level(std::size_t n) const {
        return std::span<const double>(values_).subspan(n * grid_->space_size(), grid_->space_size());
    }
    SpaceField level_field(std::size_t n) const;
    double max_abs() const;
    double min() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Samples on the spatial nodes only (an Omega-field).
class SpaceField {
public:
    SpaceField(GridPtr grid, std::vector<double> values);

    static SpaceField constant(GridPtr grid, double value);
    static SpaceField zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }
    static SpaceField sample(GridPtr grid, const SpaceFunction& fn);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t spatial) const { return values_[spatial]; }
    double max_abs() const;
    double min() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// Pointwise algebra. Operands must share a grid.
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
Field operator-(const Field& a);
Field operator*(const SpaceField& k, const Field& a);
Field abs(const Field& a);
Field map(const Field& a, const std::function<double(double)>& fn);
SpaceField operator+(const SpaceField& a, const SpaceField& b);
SpaceField operator-(const SpaceField& a, const SpaceField& b);
SpaceField operator*(const SpaceField& a, const SpaceField& b);
SpaceField operator*(double s, const SpaceField& a);
SpaceField abs(const SpaceField& a);
SpaceField map(const SpaceField& a, const std::function<double(double)>& fn);

// ---------------------------------------------------------------------------
// Differences. Second-order central in the interior, second-order one-sided
// at the ends of each axis (time included).

Field d_dx(const Field& f, std::size_t axis);
Field d2_dx2(const Field& f, std::size_t axis);
/// u_{x_i x_j}; equals d2_dx2 when i == j.
Field d2_dxdx(const Field& f, std::size_t i, std::size_t j);
Field laplacian(const Field& f);
std::vector<Field> gradient(const Field& f);
Field divergence(std::span<const Field> components);
Field d_dt(const Field& f);
Field d2_dt2(const Field& f);

SpaceField d_dx(const SpaceField& f, std::size_t axis);
SpaceField d2_dx2(const SpaceField& f, std::size_t axis);
SpaceField d2_dxdx(const SpaceField& f, std::size_t i, std::size_t j);
SpaceField laplacian(const SpaceField& f);
std::vector<SpaceField> gradient(const SpaceField& f);
SpaceField divergence(std::span<const SpaceField> components);

/// |grad f|^2 and grad f . grad g.
Field grad_dot(const Field& f, const Field& g);
SpaceField grad_dot(const SpaceField& f, const SpaceField& g);

/// Cumulative trapezoid integral from t0 = T/2: (x, t) -> int_{T/2}^t f(x, s) ds.
Field integrate_from_mid(const Field& f);

// ---------------------------------------------------------------------------
// Boundary traces.

enum class TraceKind { Dirichlet, Neumann };

/// Samples on one face for every time level; layout: tangential axes (lowest
/// fastest), then time.
class BoundaryTrace {
public:
    BoundaryTrace(GridPtr grid, Face face, std::vector<double> values);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Face& face() const { return face_; }
    std::span<const double> values() const { return values_; }
    std::size_t nodes_per_level() const { return values_.size() / grid_->nt(); }
    double max_abs() const;

private:
    GridPtr grid_;
    Face face_;
    std::vector<double> values_;
};

BoundaryTrace operator-(const BoundaryTrace& a, const BoundaryTrace& b);
BoundaryTrace operator+(const BoundaryTrace& a, const BoundaryTrace& b);
BoundaryTrace operator*(double s, const BoundaryTrace& a);

/// Dirichlet: restriction to the face. Neumann: outward one-sided second-order
/// normal difference.
BoundaryTrace trace(const Field& f, TraceKind kind, const Face& face);
/// Replaces the face samples of f by the trace samples.
Field embed(const Field& f, const BoundaryTrace& trace);
/// Tangential derivative of a trace along one of its face's tangential axes,
/// or along time when axis == grid.dim(). Order 2 uses the direct second difference.
BoundaryTrace d_tangential(const BoundaryTrace& tr, std::size_t axis, int order = 1);

SpaceField snapshot(const Field& f, double t);

/// The levels [first_level, first_level + target.nt) of f, re-timed onto target,
/// which must share the spatial mesh and the time step.
Field restrict_levels(const Field& f, GridPtr target, std::size_t first_level);
/// The same spatial samples attached to another grid with the same spatial mesh.
SpaceField rebind(const SpaceField& f, GridPtr target);

// ---------------------------------------------------------------------------
// Quadrature (trapezoid tensor product).

/// Q_{eps,T} realised on time levels: [first_level, last_level], eps snapped to
/// the nearest level.
struct TruncatedWindow {
    std::size_t first_level = 0;
    std::size_t last_level = 0;
    double epsilon = 0.0;
};
TruncatedWindow snap_epsilon(const Grid& grid, double epsilon);

struct Region {
    enum class Kind { Cylinder, Slice, Lateral, Face, Truncated };
    Kind kind = Kind::Cylinder;
    std::size_t level = 0;
    mfglab::Face face{};
    double epsilon = 0.0;

    static Region cylinder() { return {}; }
    static Region slice(std::size_t level) { return {Kind::Slice, level, {}, 0.0}; }
    static Region lateral() { return {Kind::Lateral, 0, {}, 0.0}; }
    static Region face_cylinder(mfglab::Face f) { return {Kind::Face, 0, f, 0.0}; }
    static Region truncated(double eps) { return {Kind::Truncated, 0, {}, eps}; }
};

double integrate(const Field& f, const Region& region = Region::cylinder());
double integrate(const SpaceField& f);
double integrate(const BoundaryTrace& tr);

// ---------------------------------------------------------------------------
// Discrete Sobolev norms. The *_sq variants return squared norms.

/// How the lateral H^{2,1} face norm distributes the j-indexed terms: on the face
/// in question, or literally on Gamma_j of the same sign.
enum class FaceNormReading { PerFace, Literal };

double l2_sq(const SpaceField& f);
double h1_sq(const SpaceField& f);
double h2_sq(const SpaceField& f);
double l2_sq(const Field& f, const Region& region = Region::cylinder());
/// Full H^2 over Q_T: all derivatives of total order <= 2 in (x, t).
double h2_sq(const Field& f);
/// H^{2,1}: |alpha| + 2m <= 2, over Q_T or Q_{eps,T}.
double h21_sq(const Field& f, const Region& region = Region::cylinder());

/// H^{1,0} of a function given on one face: tangential first derivatives plus L2.
double h10_sq(const BoundaryTrace& tr);
/// H^{2,1} of face data: tangential first/second derivatives, value and t-derivative.
double h21_sq(const BoundaryTrace& tr);
/// Sums over a set of faces.
double h10_sq(std::span<const BoundaryTrace> traces);
double h21_sq(std::span<const BoundaryTrace> traces);

/// Field-based lateral norms: u_{x_j} (j != i), u_{x_j x_s} ((j,s) != (i,i)), u, u_t on Gamma_i.
double h21_face_sq(const Field& f, const Face& face, FaceNormReading reading = FaceNormReading::PerFace);
double h21_lateral_sq(const Field& f, FaceNormReading reading = FaceNormReading::PerFace);
double h10_face_sq(const Field& f, const Face& face);
double h10_lateral_sq(const Field& f);

inline double norm_l2(const SpaceField& f) { return std::sqrt(l2_sq(f)); }
inline double norm_h1(const SpaceField& f) { return std::sqrt(h1_sq(f)); }
inline double norm_h2(const SpaceField& f) { return std::sqrt(h2_sq(f)); }
inline double norm_l2(const Field& f, const Region& r = Region::cylinder()) { return std::sqrt(l2_sq(f, r)); }
inline double norm_h2(const Field& f) { return std::sqrt(h2_sq(f)); }
inline double norm_h21(const Field& f, const Region& r = Region::cylinder()) { return std::sqrt(h21_sq(f, r)); }

}  // namespace mfglab
