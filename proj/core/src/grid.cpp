#include "mfglab/grid.hpp"

#include "mfglab/error.hpp"
#include "mfglab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mfglab {

namespace {

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// Applies a first (order 1) or second (order 2) difference along one axis of a
// row-major array whose axis 0 is fastest.
std::vector<double> diff_axis(std::span<const double> v, std::span<const std::size_t> dims,
                              std::size_t axis, double h, int order) {
    std::size_t stride = 1;
    for (std::size_t k = 0; k < axis; ++k) stride *= dims[k];
    const std::size_t n = dims[axis];
    const std::size_t block = stride * n;
    const std::size_t outer = v.size() / block;
    std::vector<double> out(v.size());
    const double c1 = 1.0 / (2.0 * h);
    const double c2 = 1.0 / (h * h);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < stride; ++in) {
            const std::size_t base = o * block + in;
            auto f = [&](std::size_t i) { return v[base + i * stride]; };
            auto g = [&](std::size_t i) -> double& { return out[base + i * stride]; };
            if (order == 1) {
                g(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) * c1;
                for (std::size_t i = 1; i + 1 < n; ++i) g(i) = (f(i + 1) - f(i - 1)) * c1;
                g(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) * c1;
            } else {
                g(0) = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) * c2;
                for (std::size_t i = 1; i + 1 < n; ++i) g(i) = (f(i + 1) - 2.0 * f(i) + f(i - 1)) * c2;
                g(n - 1) = (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) * c2;
            }
        }
    }
    return out;
}

// Contracts every axis against its weight vector.
double weighted_sum(std::span<const double> v, std::span<const std::size_t> dims,
                    const std::vector<std::vector<double>>& weights) {
    std::vector<double> cur(v.begin(), v.end());
    for (std::size_t axis = 0; axis < dims.size(); ++axis) {
        const std::size_t n = dims[axis];
        const std::size_t outer = cur.size() / n;
        std::vector<double> next(outer, 0.0);
        const auto& w = weights[axis];
        for (std::size_t o = 0; o < outer; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += w[i] * cur[o * n + i];
            next[o] = s;
        }
        cur = std::move(next);
    }
    return cur.empty() ? 0.0 : cur[0];
}

std::vector<double> delta_weights(std::size_t n, std::size_t at) {
    std::vector<double> w(n, 0.0);
    w[at] = 1.0;
    return w;
}

std::vector<double> window_weights(std::size_t n, std::size_t first, std::size_t last, double h) {
    std::vector<double> w(n, 0.0);
    const auto inner = trapezoid_weights(last - first + 1, h);
    std::copy(inner.begin(), inner.end(), w.begin() + static_cast<std::ptrdiff_t>(first));
    return w;
}

void check_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream os;
            os << what << ": non-finite sample at flat index " << i;
            fail(ErrorKind::NumericRange, os.str());
        }
    }
}

std::size_t face_index(const Grid& g, const Face& face) {
    return face.side == Side::Lower ? 0 : g.nx(face.axis) - 1;
}

template <class Op>
Field zip(const Field& a, const Field& b, Op op, const char* where) {
    require_same_grid(a.grid(), b.grid(), where);
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.values()[i], b.values()[i]);
    return Field(a.grid_ptr(), std::move(out));
}

template <class Op>
SpaceField zip(const SpaceField& a, const SpaceField& b, Op op, const char* where) {
    require_same_grid(a.grid(), b.grid(), where);
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.values()[i], b.values()[i]);
    return SpaceField(a.grid_ptr(), std::move(out));
}

}  // namespace

double Prism::transverse_measure() const {
    double m = 1.0;
    for (double B : half_widths) m *= 2.0 * B;
    return m;
}

void Prism::validate() const {
    require(a > 0.0 && b > a, "prism: need 0 < a < b");
    for (double B : half_widths) require(B > 0.0, "prism: every half-width must be positive");
    require(T > 0.0, "prism: T must be positive");
}

std::string to_string(const Face& face) {
    std::ostringstream os;
    os << "Gamma_" << face.axis + 1 << (face.side == Side::Upper ? "+" : "-");
    return os.str();
}

Grid::Grid(Prism prism, std::vector<std::size_t> nx, std::size_t nt)
    : prism_(std::move(prism)), nx_(std::move(nx)), nt_(nt) {
    prism_.validate();
    require(nx_.size() == prism_.dim(), "grid: one point count per spatial axis required");
    for (std::size_t n : nx_) require(n >= 5, "grid: every spatial count must be >= 5");
    require(nt_ >= 5, "grid: time count must be >= 5");
    require(nt_ % 2 == 1, "t₀ off-grid: nt must be odd so that T/2 is a time level");
    h_.resize(nx_.size());
    strides_.resize(nx_.size());
    std::size_t stride = 1;
    for (std::size_t k = 0; k < nx_.size(); ++k) {
        h_[k] = prism_.length(k) / static_cast<double>(nx_[k] - 1);
        strides_[k] = stride;
        stride *= nx_[k];
    }
    space_size_ = stride;
    tau_ = prism_.T / static_cast<double>(nt_ - 1);
}

std::size_t Grid::level_of(double t) const {
    const double r = std::round(t / tau_);
    if (r < 0.0 || r > static_cast<double>(nt_ - 1) || std::abs(r * tau_ - t) > 1e-9 * tau_) {
        std::ostringstream os;
        os << "time " << t << " is not a grid level (tau = " << tau_ << ")";
        fail(ErrorKind::InvalidArgument, os.str());
    }
    return static_cast<std::size_t>(r);
}

std::vector<std::size_t> Grid::dims() const {
    auto d = nx_;
    d.push_back(nt_);
    return d;
}

void Grid::coords(std::size_t spatial, std::span<double> out) const {
    for (std::size_t k = 0; k < nx_.size(); ++k) out[k] = x(k, axis_index(spatial, k));
}

bool Grid::on_boundary(std::size_t spatial) const {
    for (std::size_t k = 0; k < nx_.size(); ++k) {
        const std::size_t i = axis_index(spatial, k);
        if (i == 0 || i + 1 == nx_[k]) return true;
    }
    return false;
}

std::vector<Face> Grid::faces() const {
    std::vector<Face> out;
    for (std::size_t k = 0; k < nx_.size(); ++k) {
        out.push_back({k, Side::Lower});
        out.push_back({k, Side::Upper});
    }
    return out;
}

std::vector<std::size_t> Grid::face_nodes(const Face& face) const {
    require(face.axis < dim(), "face axis out of range");
    const std::size_t at = face_index(*this, face);
    std::vector<std::size_t> out;
    out.reserve(space_size_ / nx_[face.axis]);
    for (std::size_t s = 0; s < space_size_; ++s)
        if (axis_index(s, face.axis) == at) out.push_back(s);
    return out;
}

std::vector<std::size_t> Grid::tangential_axes(const Face& face) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < nx_.size(); ++k)
        if (k != face.axis) out.push_back(k);
    return out;
}

std::vector<std::size_t> Grid::face_dims(const Face& face) const {
    std::vector<std::size_t> out;
    for (std::size_t k : tangential_axes(face)) out.push_back(nx_[k]);
    return out;
}

GridPtr make_grid(const Prism& prism, std::vector<std::size_t> nx, std::size_t nt) {
    return std::make_shared<const Grid>(prism, std::move(nx), nt);
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (&a == &b || a == b) return;
    fail(ErrorKind::GridMismatch, std::string(where) + ": operands live on different grids");
}

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "field: null grid");
    if (values_.size() != grid_->size()) fail(ErrorKind::GridMismatch, "field: sample count does not match grid");
    check_finite(values_, "field");
}

Field Field::constant(GridPtr grid, double value) {
    const std::size_t n = grid->size();
    return Field(std::move(grid), std::vector<double>(n, value));
}

Field Field::sample(GridPtr grid, const SpaceTimeFunction& fn) {
    const Grid& g = *grid;
    std::vector<double> out(g.size());
    std::vector<double> x(g.dim());
    for (std::size_t s = 0; s < g.space_size(); ++s) {
        g.coords(s, x);
        for (std::size_t n = 0; n < g.nt(); ++n) out[n * g.space_size() + s] = fn(x, g.t(n));
    }
    return Field(std::move(grid), std::move(out));
}

Field Field::broadcast(const SpaceField& space) {
    const Grid& g = space.grid();
    std::vector<double> out;
    out.reserve(g.size());
    for (std::size_t n = 0; n < g.nt(); ++n) out.insert(out.end(), space.values().begin(), space.values().end());
    return Field(space.grid_ptr(), std::move(out));
}

SpaceField Field::level_field(std::size_t n) const {
    require(n < grid_->nt(), "time level out of range");
    auto lv = level(n);
    return SpaceField(grid_, std::vector<double>(lv.begin(), lv.end()));
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

SpaceField::SpaceField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "space field: null grid");
    if (values_.size() != grid_->space_size())
        fail(ErrorKind::GridMismatch, "space field: sample count does not match grid");
    check_finite(values_, "space field");
}

SpaceField SpaceField::constant(GridPtr grid, double value) {
    const std::size_t n = grid->space_size();
    return SpaceField(std::move(grid), std::vector<double>(n, value));
}

SpaceField SpaceField::sample(GridPtr grid, const SpaceFunction& fn) {
    const Grid& g = *grid;
    std::vector<double> out(g.space_size());
    std::vector<double> x(g.dim());
    for (std::size_t s = 0; s < g.space_size(); ++s) {
        g.coords(s, x);
        out[s] = fn(x);
    }
    return SpaceField(std::move(grid), std::move(out));
}

double SpaceField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SpaceField::min() const { return *std::min_element(values_.begin(), values_.end()); }

Field operator+(const Field& a, const Field& b) { return zip(a, b, std::plus<>(), "field +"); }
Field operator-(const Field& a, const Field& b) { return zip(a, b, std::minus<>(), "field -"); }
Field operator*(const Field& a, const Field& b) { return zip(a, b, std::multiplies<>(), "field *"); }
Field operator*(double s, const Field& a) { return map(a, [s](double v) { return s * v; }); }
Field operator-(const Field& a) { return map(a, [](double v) { return -v; }); }
Field abs(const Field& a) { return map(a, [](double v) { return std::abs(v); }); }

Field operator*(const SpaceField& k, const Field& a) {
    require_same_grid(k.grid(), a.grid(), "space field * field");
    const std::size_t S = a.grid().space_size();
    std::vector<double> out(a.values().begin(), a.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k[i % S];
    return Field(a.grid_ptr(), std::move(out));
}

Field map(const Field& a, const std::function<double(double)>& fn) {
    std::vector<double> out(a.values().size());
    std::transform(a.values().begin(), a.values().end(), out.begin(), fn);
    return Field(a.grid_ptr(), std::move(out));
}

SpaceField operator+(const SpaceField& a, const SpaceField& b) { return zip(a, b, std::plus<>(), "space field +"); }
SpaceField operator-(const SpaceField& a, const SpaceField& b) { return zip(a, b, std::minus<>(), "space field -"); }
SpaceField operator*(const SpaceField& a, const SpaceField& b) {
    return zip(a, b, std::multiplies<>(), "space field *");
}
SpaceField operator*(double s, const SpaceField& a) { return map(a, [s](double v) { return s * v; }); }
SpaceField abs(const SpaceField& a) { return map(a, [](double v) { return std::abs(v); }); }

SpaceField map(const SpaceField& a, const std::function<double(double)>& fn) {
    std::vector<double> out(a.values().size());
    std::transform(a.values().begin(), a.values().end(), out.begin(), fn);
    return SpaceField(a.grid_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------

Field d_dx(const Field& f, std::size_t axis) {
    const Grid& g = f.grid();
    require(axis < g.dim(), "d_dx: axis out of range");
    return Field(f.grid_ptr(), diff_axis(f.values(), g.dims(), axis, g.h(axis), 1));
}

Field d2_dx2(const Field& f, std::size_t axis) {
    const Grid& g = f.grid();
    require(axis < g.dim(), "d2_dx2: axis out of range");
    return Field(f.grid_ptr(), diff_axis(f.values(), g.dims(), axis, g.h(axis), 2));
}

Field d2_dxdx(const Field& f, std::size_t i, std::size_t j) {
    if (i == j) return d2_dx2(f, i);
    return d_dx(d_dx(f, i), j);
}

Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    const auto dims = g.dims();
    std::vector<double> out(f.values().size(), 0.0);
    for (std::size_t k = 0; k < g.dim(); ++k) {
        const auto dk = diff_axis(f.values(), dims, k, g.h(k), 2);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += dk[i];
    }
    return Field(f.grid_ptr(), std::move(out));
}

std::vector<Field> gradient(const Field& f) {
    std::vector<Field> out;
    for (std::size_t k = 0; k < f.grid().dim(); ++k) out.push_back(d_dx(f, k));
    return out;
}

Field divergence(std::span<const Field> components) {
    require(!components.empty() && components.size() == components[0].grid().dim(),
            "divergence: need one component per spatial axis");
    Field acc = d_dx(components[0], 0);
    for (std::size_t k = 1; k < components.size(); ++k) acc = acc + d_dx(components[k], k);
    return acc;
}

Field d_dt(const Field& f) {
    const Grid& g = f.grid();
    return Field(f.grid_ptr(), diff_axis(f.values(), g.dims(), g.dim(), g.tau(), 1));
}

Field d2_dt2(const Field& f) {
    const Grid& g = f.grid();
    return Field(f.grid_ptr(), diff_axis(f.values(), g.dims(), g.dim(), g.tau(), 2));
}

SpaceField d_dx(const SpaceField& f, std::size_t axis) {
    const Grid& g = f.grid();
    require(axis < g.dim(), "d_dx: axis out of range");
    return SpaceField(f.grid_ptr(), diff_axis(f.values(), g.nx(), axis, g.h(axis), 1));
}

SpaceField d2_dx2(const SpaceField& f, std::size_t axis) {
    const Grid& g = f.grid();
    require(axis < g.dim(), "d2_dx2: axis out of range");
    return SpaceField(f.grid_ptr(), diff_axis(f.values(), g.nx(), axis, g.h(axis), 2));
}

SpaceField d2_dxdx(const SpaceField& f, std::size_t i, std::size_t j) {
    if (i == j) return d2_dx2(f, i);
    return d_dx(d_dx(f, i), j);
}

SpaceField laplacian(const SpaceField& f) {
    SpaceField acc = d2_dx2(f, 0);
    for (std::size_t k = 1; k < f.grid().dim(); ++k) acc = acc + d2_dx2(f, k);
    return acc;
}

std::vector<SpaceField> gradient(const SpaceField& f) {
    std::vector<SpaceField> out;
    for (std::size_t k = 0; k < f.grid().dim(); ++k) out.push_back(d_dx(f, k));
    return out;
}

SpaceField divergence(std::span<const SpaceField> components) {
    require(!components.empty() && components.size() == components[0].grid().dim(),
            "divergence: need one component per spatial axis");
    SpaceField acc = d_dx(components[0], 0);
    for (std::size_t k = 1; k < components.size(); ++k) acc = acc + d_dx(components[k], k);
    return acc;
}

Field grad_dot(const Field& f, const Field& g) {
    const auto gf = gradient(f);
    const auto gg = &f == &g ? gf : gradient(g);
    Field acc = gf[0] * gg[0];
    for (std::size_t k = 1; k < gf.size(); ++k) acc = acc + gf[k] * gg[k];
    return acc;
}

SpaceField grad_dot(const SpaceField& f, const SpaceField& g) {
    const auto gf = gradient(f);
    const auto gg = &f == &g ? gf : gradient(g);
    SpaceField acc = gf[0] * gg[0];
    for (std::size_t k = 1; k < gf.size(); ++k) acc = acc + gf[k] * gg[k];
    return acc;
}

Field integrate_from_mid(const Field& f) {
    const Grid& g = f.grid();
    const std::size_t S = g.space_size();
    const std::size_t mid = g.mid_level();
    const double half = 0.5 * g.tau();
    auto v = f.values();
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t n = mid + 1; n < g.nt(); ++n)
            out[n * S + s] = out[(n - 1) * S + s] + half * (v[(n - 1) * S + s] + v[n * S + s]);
        for (std::size_t n = mid; n-- > 0;)
            out[n * S + s] = out[(n + 1) * S + s] - half * (v[n * S + s] + v[(n + 1) * S + s]);
    }
    return Field(f.grid_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------

BoundaryTrace::BoundaryTrace(GridPtr grid, Face face, std::vector<double> values)
    : grid_(std::move(grid)), face_(face), values_(std::move(values)) {
    require(face_.axis < grid_->dim(), "trace: face axis out of range");
    if (values_.size() != product(grid_->face_dims(face_)) * grid_->nt())
        fail(ErrorKind::GridMismatch, "trace: sample count does not match face");
    check_finite(values_, "trace");
}

double BoundaryTrace::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

namespace {
void require_same_face(const BoundaryTrace& a, const BoundaryTrace& b) {
    require_same_grid(a.grid(), b.grid(), "trace arithmetic");
    if (!(a.face() == b.face())) fail(ErrorKind::GridMismatch, "trace arithmetic: faces differ");
}
}  // namespace

BoundaryTrace operator-(const BoundaryTrace& a, const BoundaryTrace& b) {
    require_same_face(a, b);
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
    return BoundaryTrace(a.grid_ptr(), a.face(), std::move(out));
}

BoundaryTrace operator+(const BoundaryTrace& a, const BoundaryTrace& b) {
    require_same_face(a, b);
    std::vector<double> out(a.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    return BoundaryTrace(a.grid_ptr(), a.face(), std::move(out));
}

BoundaryTrace operator*(double s, const BoundaryTrace& a) {
    std::vector<double> out(a.values().begin(), a.values().end());
    for (double& v : out) v *= s;
    return BoundaryTrace(a.grid_ptr(), a.face(), std::move(out));
}

BoundaryTrace trace(const Field& f, TraceKind kind, const Face& face) {
    const Grid& g = f.grid();
    const auto nodes = g.face_nodes(face);
    const std::size_t S = g.space_size();
    const std::size_t st = g.stride(face.axis);
    const double h = g.h(face.axis);
    auto v = f.values();
    std::vector<double> out;
    out.reserve(nodes.size() * g.nt());
    for (std::size_t n = 0; n < g.nt(); ++n) {
        for (std::size_t s : nodes) {
            const std::size_t i = n * S + s;
            if (kind == TraceKind::Dirichlet) {
                out.push_back(v[i]);
            } else if (face.side == Side::Upper) {
                out.push_back((3.0 * v[i] - 4.0 * v[i - st] + v[i - 2 * st]) / (2.0 * h));
            } else {
                out.push_back((3.0 * v[i] - 4.0 * v[i + st] + v[i + 2 * st]) / (2.0 * h));
            }
        }
    }
    return BoundaryTrace(f.grid_ptr(), face, std::move(out));
}

Field embed(const Field& f, const BoundaryTrace& tr) {
    require_same_grid(f.grid(), tr.grid(), "embed");
    const Grid& g = f.grid();
    const auto nodes = g.face_nodes(tr.face());
    const std::size_t S = g.space_size();
    std::vector<double> out(f.values().begin(), f.values().end());
    std::size_t j = 0;
    for (std::size_t n = 0; n < g.nt(); ++n)
        for (std::size_t s : nodes) out[n * S + s] = tr.values()[j++];
    return Field(f.grid_ptr(), std::move(out));
}

BoundaryTrace d_tangential(const BoundaryTrace& tr, std::size_t axis, int order) {
    require(order == 1 || order == 2, "d_tangential: order must be 1 or 2");
    const Grid& g = tr.grid();
    auto dims = g.face_dims(tr.face());
    dims.push_back(g.nt());
    if (axis == g.dim()) {
        return BoundaryTrace(tr.grid_ptr(), tr.face(), diff_axis(tr.values(), dims, dims.size() - 1, g.tau(), order));
    }
    const auto tang = g.tangential_axes(tr.face());
    const auto it = std::find(tang.begin(), tang.end(), axis);
    require(it != tang.end(), "d_tangential: axis is normal to the face");
    const auto local = static_cast<std::size_t>(it - tang.begin());
    return BoundaryTrace(tr.grid_ptr(), tr.face(), diff_axis(tr.values(), dims, local, g.h(axis), order));
}

SpaceField snapshot(const Field& f, double t) { return f.level_field(f.grid().level_of(t)); }

Field restrict_levels(const Field& f, GridPtr target, std::size_t first_level) {
    const Grid& g = f.grid();
    require(g.nx() == target->nx() && g.prism().a == target->prism().a && g.prism().b == target->prism().b &&
                g.prism().half_widths == target->prism().half_widths,
            "restrict_levels: spatial grids differ");
    require(std::abs(g.tau() - target->tau()) <= 1e-12 * g.tau(), "restrict_levels: time steps differ");
    require(first_level + target->nt() <= g.nt(), "restrict_levels: window exceeds the source levels");
    auto v = f.values().subspan(first_level * g.space_size(), target->size());
    return Field(std::move(target), std::vector<double>(v.begin(), v.end()));
}

SpaceField rebind(const SpaceField& f, GridPtr target) {
    require(f.grid().nx() == target->nx(), "rebind: spatial grids differ");
    return SpaceField(std::move(target), std::vector<double>(f.values().begin(), f.values().end()));
}

// ---------------------------------------------------------------------------

TruncatedWindow snap_epsilon(const Grid& grid, double epsilon) {
    require(epsilon > 0.0 && epsilon < 0.5 * grid.T(), "epsilon must lie in (0, T/2)");
    const auto level = static_cast<std::size_t>(std::llround(epsilon / grid.tau()));
    require(level >= 1 && level < grid.mid_level(), "epsilon snaps to a level outside (0, T/2); refine the time grid");
    return {level, grid.nt() - 1 - level, static_cast<double>(level) * grid.tau()};
}

namespace {

std::vector<std::vector<double>> cylinder_weights(const Grid& g) {
    std::vector<std::vector<double>> w;
    for (std::size_t k = 0; k < g.dim(); ++k) w.push_back(trapezoid_weights(g.nx(k), g.h(k)));
    w.push_back(trapezoid_weights(g.nt(), g.tau()));
    return w;
}

double integrate_face(const Field& f, const Face& face) {
    const Grid& g = f.grid();
    auto w = cylinder_weights(g);
    w[face.axis] = delta_weights(g.nx(face.axis), face_index(g, face));
    return weighted_sum(f.values(), g.dims(), w);
}

}  // namespace

double integrate(const Field& f, const Region& region) {
    const Grid& g = f.grid();
    auto w = cylinder_weights(g);
    switch (region.kind) {
    case Region::Kind::Cylinder:
        break;
    case Region::Kind::Slice:
        require(region.level < g.nt(), "slice level out of range");
        w.back() = delta_weights(g.nt(), region.level);
        break;
    case Region::Kind::Truncated: {
        const auto win = snap_epsilon(g, region.epsilon);
        w.back() = window_weights(g.nt(), win.first_level, win.last_level, g.tau());
        break;
    }
    case Region::Kind::Face:
        return integrate_face(f, region.face);
    case Region::Kind::Lateral: {
        double s = 0.0;
        for (const auto& face : g.faces()) s += integrate_face(f, face);
        return s;
    }
    }
    return weighted_sum(f.values(), g.dims(), w);
}

double integrate(const SpaceField& f) {
    const Grid& g = f.grid();
    std::vector<std::vector<double>> w;
    for (std::size_t k = 0; k < g.dim(); ++k) w.push_back(trapezoid_weights(g.nx(k), g.h(k)));
    return weighted_sum(f.values(), g.nx(), w);
}

double integrate(const BoundaryTrace& tr) {
    const Grid& g = tr.grid();
    std::vector<std::vector<double>> w;
    auto dims = g.face_dims(tr.face());
    for (std::size_t k : g.tangential_axes(tr.face())) w.push_back(trapezoid_weights(g.nx(k), g.h(k)));
    w.push_back(trapezoid_weights(g.nt(), g.tau()));
    dims.push_back(g.nt());
    return weighted_sum(tr.values(), dims, w);
}

// ---------------------------------------------------------------------------

namespace {
double sq_int(const SpaceField& f) { return integrate(f * f); }
double sq_int(const Field& f, const Region& r) { return integrate(f * f, r); }
double sq_int(const BoundaryTrace& tr) {
    std::vector<double> v(tr.values().begin(), tr.values().end());
    for (double& x : v) x *= x;
    return integrate(BoundaryTrace(tr.grid_ptr(), tr.face(), std::move(v)));
}
Face same_side(const Face& face, std::size_t axis) { return {axis, face.side}; }
}  // namespace

double l2_sq(const SpaceField& f) { return sq_int(f); }

double h1_sq(const SpaceField& f) {
    double s = sq_int(f);
    for (const auto& d : gradient(f)) s += sq_int(d);
    return s;
}

double h2_sq(const SpaceField& f) {
    double s = h1_sq(f);
    const std::size_t n = f.grid().dim();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) s += sq_int(d2_dxdx(f, i, j));
    return s;
}

double l2_sq(const Field& f, const Region& region) { return sq_int(f, region); }

double h2_sq(const Field& f) {
    const auto r = Region::cylinder();
    const std::size_t n = f.grid().dim();
    const Field ft = d_dt(f);
    double s = sq_int(f, r) + sq_int(ft, r) + sq_int(d2_dt2(f), r);
    for (std::size_t i = 0; i < n; ++i) {
        const Field fi = d_dx(f, i);
        s += sq_int(fi, r) + sq_int(d_dx(ft, i), r);
        for (std::size_t j = i; j < n; ++j) s += sq_int(j == i ? d2_dx2(f, i) : d_dx(fi, j), r);
    }
    return s;
}

double h21_sq(const Field& f, const Region& region) {
    const std::size_t n = f.grid().dim();
    double s = sq_int(f, region) + sq_int(d_dt(f), region);
    for (std::size_t i = 0; i < n; ++i) {
        const Field fi = d_dx(f, i);
        s += sq_int(fi, region);
        for (std::size_t j = i; j < n; ++j) s += sq_int(j == i ? d2_dx2(f, i) : d_dx(fi, j), region);
    }
    return s;
}

double h10_sq(const BoundaryTrace& tr) {
    double s = sq_int(tr);
    for (std::size_t k : tr.grid().tangential_axes(tr.face())) s += sq_int(d_tangential(tr, k));
    return s;
}

double h21_sq(const BoundaryTrace& tr) {
    const Grid& g = tr.grid();
    double s = sq_int(tr) + sq_int(d_tangential(tr, g.dim()));
    const auto tang = g.tangential_axes(tr.face());
    for (std::size_t j : tang) {
        const auto dj = d_tangential(tr, j);
        s += sq_int(dj);
        for (std::size_t k : tang) s += sq_int(k == j ? d_tangential(tr, j, 2) : d_tangential(dj, k));
    }
    return s;
}

double h10_sq(std::span<const BoundaryTrace> traces) {
    double s = 0.0;
    for (const auto& tr : traces) s += h10_sq(tr);
    return s;
}

double h21_sq(std::span<const BoundaryTrace> traces) {
    double s = 0.0;
    for (const auto& tr : traces) s += h21_sq(tr);
    return s;
}

double h21_face_sq(const Field& f, const Face& face, FaceNormReading reading) {
    const std::size_t n = f.grid().dim();
    const std::size_t i = face.axis;
    auto where = [&](std::size_t j) {
        return Region::face_cylinder(reading == FaceNormReading::PerFace ? face : same_side(face, j));
    };
    const auto own = Region::face_cylinder(face);
    double s = sq_int(f, own) + sq_int(d_dt(f), own);
    for (std::size_t j = 0; j < n; ++j) {
        const Field fj = d_dx(f, j);
        if (j != i) s += sq_int(fj, where(j));
        for (std::size_t k = 0; k < n; ++k) {
            if (j == i && k == i) continue;
            s += sq_int(k == j ? d2_dx2(f, j) : d_dx(fj, k), where(j));
        }
    }
    return s;
}

double h21_lateral_sq(const Field& f, FaceNormReading reading) {
    double s = 0.0;
    for (const auto& face : f.grid().faces()) s += h21_face_sq(f, face, reading);
    return s;
}

double h10_face_sq(const Field& f, const Face& face) {
    const auto r = Region::face_cylinder(face);
    double s = sq_int(f, r);
    for (std::size_t j = 0; j < f.grid().dim(); ++j)
        if (j != face.axis) s += sq_int(d_dx(f, j), r);
    return s;
}

double h10_lateral_sq(const Field& f) {
    double s = 0.0;
    for (const auto& face : f.grid().faces()) s += h10_face_sq(f, face);
    return s;
}

}  // namespace mfglab
