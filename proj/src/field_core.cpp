#include "mahl/field_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace mahl {

double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 8) {
        KahanSum k;
        for (double x : xs) k.add(x);
        return k.value();
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   double tol_floor, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // tol_floor keeps deep recursions from demanding sub-roundoff accuracy
    if (std::abs(delta) <= 15.0 * std::max(tol, tol_floor) || b - a < 1e-14)
        return left + right + delta / 15.0;
    if (depth <= 0) throw QuadratureFailure("adaptive quadrature depth exhausted");
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, tol_floor, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, tol_floor, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol_floor = 1e-17 * (1.0 + std::abs(whole));
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, tol_floor, max_depth);
}

TorusGrid make_grid(int n, int N, GridKind kind) {
    if (n < 1 || n > kMaxDim)
        throw InvalidResolution("complex dimension must be in [1," + std::to_string(kMaxDim) + "]");
    if (N < 8 || (N & (N - 1)) != 0)
        throw InvalidResolution("N must be a power of two, N >= 8 (got " + std::to_string(N) + ")");
    TorusGrid g;
    g.n = n;
    g.N = N;
    g.h = 1.0 / N;
    g.kind = kind;
    return g;
}

double torus_distance(const TorusGrid& g, const double* a, const double* b) {
    double s = 0.0;
    for (int ax = 0; ax < g.dims(); ++ax) {
        double d = std::abs(a[ax] - b[ax]);
        if (g.periodic() && d > 0.5) d = 1.0 - d;
        s += d * d;
    }
    return std::sqrt(s);
}

double torus_distance(const TorusGrid& g, std::size_t ia, std::size_t ib) {
    double xa[2 * kMaxDim], xb[2 * kMaxDim];
    g.point(ia, xa);
    g.point(ib, xb);
    return torus_distance(g, xa, xb);
}

ScalarField::ScalarField(const TorusGrid& g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
    if (v.size() != g.points())
        throw GridMismatch("field size does not match grid point count");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw NonFinite("non-finite field value at point " + std::to_string(i));
}

ScalarField ScalarField::constant(const TorusGrid& g, double value) {
    return ScalarField(g, std::vector<double>(g.points(), value));
}

double ScalarField::sup() const {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    return m;
}

double ScalarField::inf() const {
    double m = v[0];
    for (double x : v) m = std::min(m, x);
    return m;
}

double ScalarField::mean() const { return pairwise_sum(v) / double(v.size()); }

double ScalarField::integral() const {
    return pairwise_sum(v) * grid.cell_volume();
}

double integral_product(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw GridMismatch("integral_product: grids differ");
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a.v[i] * b.v[i];
    return pairwise_sum(prod) * a.grid.cell_volume();
}

KahlerBackground flat_background(int n) {
    KahlerBackground bg;
    bg.n = n;
    for (int i = 0; i < n; ++i) bg.g[std::size_t(i) * n + i] = 1.0;
    bg.det_g = 1.0;
    bg.V_omega = 1.0;
    return bg;
}

KahlerBackground diagonal_background(int n, const std::vector<double>& diag) {
    KahlerBackground bg;
    bg.n = n;
    double det = 1.0;
    for (int i = 0; i < n; ++i) {
        bg.g[std::size_t(i) * n + i] = diag[std::size_t(i)];
        det *= diag[std::size_t(i)];
    }
    bg.det_g = det;
    bg.V_omega = det;
    return bg;
}

GridMeasure GridMeasure::from_density(ScalarField density) {
    return with_atoms(std::move(density), {});
}

GridMeasure GridMeasure::with_atoms(ScalarField density, std::vector<Atom> atoms) {
    GridMeasure m;
    for (double x : density.v)
        if (x < 0.0) throw MahlError("measure density must be nonnegative");
    for (const auto& a : atoms)
        if (a.mass <= 0.0) throw MahlError("atom mass must be positive");
    m.total = density.integral();
    for (const auto& a : atoms) m.total += a.mass;
    m.density = std::move(density);
    m.atoms = std::move(atoms);
    return m;
}

double GridMeasure::mass_on(const std::vector<std::uint8_t>& mask) const {
    std::vector<double> masked(density.size(), 0.0);
    for (std::size_t i = 0; i < masked.size(); ++i)
        if (mask[i]) masked[i] = density.v[i];
    double s = pairwise_sum(masked) * density.grid.cell_volume();
    for (const auto& a : atoms)
        if (mask[a.point]) s += a.mass;
    return s;
}

// ---------------------------------------------------------------------------
// descriptors
// ---------------------------------------------------------------------------

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double smooth_dist2_eval(const TorusGrid& g, const double* x, const std::vector<double>& c) {
    // periodic analogue of |z-c|^2: sum_a (1 - cos 2 pi (x_a - c_a)) / (2 pi^2);
    // on patches the plain squared distance (already smooth there)
    if (!g.periodic()) {
        const double d = torus_distance(g, x, c.data());
        return d * d;
    }
    double s = 0.0;
    for (int a = 0; a < g.dims(); ++a)
        s += (1.0 - std::cos(two_pi * (x[a] - c[a]))) / (2.0 * std::numbers::pi * std::numbers::pi);
    return s;
}

} // namespace

double radial_chi_eval(const json& profile, double t); // defined in radial_toric.cpp

namespace {

double eval_descriptor(const TorusGrid& g, const FieldDescriptor& d,
                       const double* x, std::size_t& clipped) {
    if (d.kind == "constant") return d.value;
    if (d.kind == "trig") {
        double s = d.value;
        for (const auto& m : d.modes) {
            double phase = m.phase;
            for (int a = 0; a < g.dims(); ++a)
                phase += two_pi * m.k[std::size_t(a)] * x[a];
            s += m.amp * std::cos(phase);
        }
        return s;
    }
    std::vector<double> c = d.center;
    c.resize(std::size_t(g.dims()), 0.0);
    if (d.kind == "dist_power") {
        double r = torus_distance(g, x, c.data());
        if (r < d.r_floor) r = d.r_floor;
        return d.coef * std::pow(r, d.exponent);
    }
    if (d.kind == "log_dist") {
        double r = torus_distance(g, x, c.data());
        double val = std::log(r);
        if (!(val > d.floor)) {
            ++clipped;
            val = d.floor;
        }
        return val;
    }
    if (d.kind == "smooth_log_pole")
        return 0.5 * d.weight * std::log(d.eps * d.eps + smooth_dist2_eval(g, x, c));
    if (d.kind == "smooth_dist2") return d.coef * smooth_dist2_eval(g, x, c);
    if (d.kind == "radial_chi") {
        double r = torus_distance(g, x, c.data());
        if (r < d.r_floor) r = d.r_floor;
        return d.coef * radial_chi_eval(d.profile, std::log(r));
    }
    if (d.kind == "ring") {
        double r = torus_distance(g, x, c.data());
        double s = (r - d.radius) / d.width;
        return d.coef * std::exp(-s * s);
    }
    if (d.kind == "sum") {
        double s = 0.0;
        for (const auto& t : d.terms) s += eval_descriptor(g, t, x, clipped);
        return s;
    }
    if (d.kind == "scale") {
        return d.coef * eval_descriptor(g, d.terms.at(0), x, clipped);
    }
    throw ConfigError("unknown descriptor kind: " + d.kind);
}

} // namespace

SampleReport sample(const TorusGrid& g, const FieldDescriptor& d) {
    std::vector<double> vals(g.points());
    std::size_t clipped = 0;
    double x[2 * kMaxDim];
    for (std::size_t i = 0; i < vals.size(); ++i) {
        g.point(i, x);
        double val = eval_descriptor(g, d, x, clipped);
        if (!std::isfinite(val))
            throw NonFinite("descriptor evaluates non-finite at point " + std::to_string(i));
        vals[i] = val;
    }
    SampleReport rep;
    rep.field = ScalarField(g, std::move(vals));
    rep.clipped = clipped;
    return rep;
}

ScalarField sample_field(const TorusGrid& g, const FieldDescriptor& d) {
    return sample(g, d).field;
}

json FieldDescriptor::to_json() const {
    json j;
    j["kind"] = kind;
    if (kind == "constant") j["value"] = value;
    if (kind == "trig") {
        j["value"] = value;
        json ms = json::array();
        for (const auto& m : modes)
            ms.push_back({{"amp", m.amp}, {"k", m.k}, {"phase", m.phase}});
        j["modes"] = ms;
    }
    if (!center.empty()) j["center"] = center;
    if (kind == "dist_power") {
        j["coef"] = coef;
        j["exponent"] = exponent;
        j["r_floor"] = r_floor;
    }
    if (kind == "log_dist") j["floor"] = floor;
    if (kind == "smooth_log_pole") {
        j["eps"] = eps;
        j["weight"] = weight;
    }
    if (kind == "smooth_dist2" || kind == "scale") j["coef"] = coef;
    if (kind == "radial_chi") {
        j["coef"] = coef;
        j["r_floor"] = r_floor;
        j["profile"] = profile;
    }
    if (kind == "ring") {
        j["coef"] = coef;
        j["radius"] = radius;
        j["width"] = width;
    }
    if (kind == "sum" || kind == "scale") {
        json ts = json::array();
        for (const auto& t : terms) ts.push_back(t.to_json());
        j["terms"] = ts;
    }
    return j;
}

FieldDescriptor FieldDescriptor::from_json(const json& j) {
    FieldDescriptor d;
    if (!j.contains("kind")) throw ConfigError("descriptor missing kind");
    d.kind = j.at("kind").get<std::string>();
    d.value = j.value("value", 0.0);
    d.coef = j.value("coef", 1.0);
    d.exponent = j.value("exponent", 0.0);
    d.floor = j.value("floor", -1e12);
    d.r_floor = j.value("r_floor", 0.0);
    d.eps = j.value("eps", 0.0);
    d.weight = j.value("weight", 1.0);
    d.radius = j.value("radius", 0.0);
    d.width = j.value("width", 0.0);
    if (j.contains("center")) d.center = j.at("center").get<std::vector<double>>();
    if (j.contains("modes"))
        for (const auto& m : j.at("modes")) {
            FieldDescriptor::Mode mode;
            mode.amp = m.at("amp").get<double>();
            mode.k = m.at("k").get<std::vector<int>>();
            mode.phase = m.value("phase", 0.0);
            d.modes.push_back(std::move(mode));
        }
    if (j.contains("terms"))
        for (const auto& t : j.at("terms")) d.terms.push_back(from_json(t));
    if (j.contains("profile")) d.profile = j.at("profile");
    return d;
}

// ---------------------------------------------------------------------------
// field file IO
// ---------------------------------------------------------------------------

namespace {

void write_le_doubles(std::ostream& os, std::span<const double> xs) {
    // x86-64 is little-endian; byte-swap path kept for completeness
    static_assert(sizeof(double) == 8);
    for (double x : xs) {
        unsigned char buf[8];
        std::memcpy(buf, &x, 8);
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(buf, buf + 8);
        os.write(reinterpret_cast<const char*>(buf), 8);
    }
}

} // namespace

void field_io_write(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    json header = {{"magic", "mahl-field"},
                   {"version", 1},
                   {"n", f.grid.n},
                   {"N", f.grid.N},
                   {"kind", f.grid.periodic() ? "periodic" : "patch"}};
    os << header.dump() << "\n";
    write_le_doubles(os, f.v);
    if (!os) throw FormatError("short write to " + path);
}

ScalarField field_io_read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw FormatError("missing header line in " + path);
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception&) {
        throw FormatError("invalid field header in " + path);
    }
    if (header.value("magic", "") != "mahl-field" || header.value("version", 0) != 1)
        throw FormatError("bad magic/version in " + path);
    const std::string kind = header.value("kind", "periodic");
    TorusGrid g = make_grid(header.at("n").get<int>(), header.at("N").get<int>(),
                            kind == "patch" ? GridKind::patch : GridKind::periodic);
    std::vector<double> vals(g.points());
    std::vector<unsigned char> buf(vals.size() * 8);
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (std::size_t(is.gcount()) != buf.size())
        throw FormatError("truncated payload in " + path);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        unsigned char b[8];
        std::memcpy(b, buf.data() + 8 * i, 8);
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(b, b + 8);
        std::memcpy(&vals[i], b, 8);
    }
    return ScalarField(g, std::move(vals));
}

} // namespace mahl
