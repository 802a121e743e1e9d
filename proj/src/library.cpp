#include "lagdisc/library.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

namespace lagdisc {

std::optional<std::size_t> CandidateLibrary::find(const std::string& label) const {
    for (std::size_t j = 0; j < bases.size(); ++j)
        if (bases[j].label == label) return j;
    return std::nullopt;
}

std::vector<std::string> CandidateLibrary::labels() const {
    std::vector<std::string> out;
    out.reserve(bases.size());
    for (const auto& b : bases) out.push_back(b.label);
    return out;
}

void CandidateLibrary::validate() const {
    require(bases.size() >= 2, ErrorKind::InvalidArgument, "library needs at least 2 bases");
    require(kinetic_index < bases.size() && bases[kinetic_index].is_kinetic_of(target_coord),
            ErrorKind::InvalidArgument, "kinetic index does not point at 1/2 u_t^2 of the target");
    std::set<std::string> seen;
    for (const auto& b : bases)
        require(seen.insert(b.label).second, ErrorKind::InvalidArgument,
                fmt::format("duplicate basis label '{}'", b.label));
}

LibraryOptions default_library_options(const std::string& system) {
    LibraryOptions o;
    if (system == "harmonic" || system == "pendulum") return o;
    if (system == "duffing") {
        o.position_degree = 4;
        o.velocity_degree = 3;
        o.trig_harmonics = 1;
        o.position_trig = false;
        o.gauge_degree = 3;
        o.gauge_mixed = false;
        return o;
    }
    if (system == "3dof") {
        o.position_degree = 4;
        o.velocity_degree = 3;
        o.trig_harmonics = 1;
        o.position_trig = false;
        o.gauge_degree = 2;
        o.difference_degree = 4;
        return o;
    }
    if (system == "wave") return o;
    if (system == "beam") {
        o.constant = false;
        o.field_quartic = true;
        o.field_curvature = true;
        return o;
    }
    fail(ErrorKind::Lookup, fmt::format("no default library for system '{}'", system));
}

namespace {

std::string name_of(const SystemSpec& spec, std::size_t c) {
    return c < spec.coord_names.size() ? spec.coord_names[c] : fmt::format("q{}", c);
}

Atom pow_atom(const LinearForm& f, int p) {
    Atom a;
    a.form = f;
    a.func = Func::Pow;
    a.param = p;
    return a;
}

Atom func_atom(const LinearForm& f, Func fn) {
    Atom a;
    a.form = f;
    a.func = fn;
    a.param = 1.0;
    return a;
}

std::vector<BasisDescriptor> single_dof(const SystemSpec& spec, const LibraryOptions& o) {
    const std::string n = name_of(spec, 0);
    const auto X = basis::coordinate(Slot::Position, 0, n);
    const auto V = basis::coordinate(Slot::Velocity, 0, n);
    std::vector<BasisDescriptor> b;
    if (o.constant) b.push_back(basis::constant());
    for (int p = 1; p <= o.position_degree; ++p) b.push_back(basis::monomial(0, n, p));
    if (o.abs_terms) b.push_back(basis::abs_product(Slot::Position, X));
    if (o.position_trig) b.push_back(basis::trig(Func::Cos, Slot::Position, 0, n, 1.0));
    b.push_back(basis::kinetic(0, n));
    for (int p = 1; p <= o.velocity_degree; p += 2) b.push_back(basis::velocity_monomial(0, n, p));
    if (o.abs_terms) b.push_back(basis::abs_product(Slot::Velocity, V));
    for (int k = 1; k <= o.trig_harmonics; ++k) {
        b.push_back(basis::trig(Func::Sin, Slot::Velocity, 0, n, k));
        b.push_back(basis::trig(Func::Cos, Slot::Velocity, 0, n, k));
    }
    for (int p = 1; p <= o.gauge_degree; ++p) b.push_back(basis::product(pow_atom(X, p), pow_atom(V, 1)));
    if (o.gauge_mixed) {
        Atom s = func_atom(X, Func::Sin), c = func_atom(X, Func::Cos);
        b.push_back(basis::product(s, pow_atom(V, 1)));
        b.push_back(basis::product(c, pow_atom(V, 1)));
        b.push_back(basis::product(func_atom(X, Func::Abs), pow_atom(V, 1)));
        b.push_back(basis::product(func_atom(X, Func::AbsProduct), pow_atom(V, 1)));
    }
    return b;
}

std::vector<BasisDescriptor> chain(const SystemSpec& spec, const LibraryOptions& o) {
    const std::size_t n = spec.dim;
    std::vector<BasisDescriptor> b;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string nm = name_of(spec, i);
        const auto X = basis::coordinate(Slot::Position, i, nm);
        const auto V = basis::coordinate(Slot::Velocity, i, nm);
        for (int p = 1; p <= o.position_degree; ++p) b.push_back(basis::monomial(i, nm, p));
        if (o.abs_terms) b.push_back(basis::abs_product(Slot::Position, X));
        b.push_back(basis::kinetic(i, nm));
        for (int p = 1; p <= o.velocity_degree; p += 2) b.push_back(basis::velocity_monomial(i, nm, p));
        for (int k = 1; k <= o.trig_harmonics; ++k) {
            b.push_back(basis::trig(Func::Sin, Slot::Velocity, i, nm, k));
            b.push_back(basis::trig(Func::Cos, Slot::Velocity, i, nm, k));
        }
        for (int p = 1; p <= o.gauge_degree; ++p)
            b.push_back(basis::product(pow_atom(X, p), pow_atom(V, 1)));
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (int p = 2; p <= o.difference_degree; ++p)
            b.push_back(basis::difference_monomial(i + 1, name_of(spec, i + 1), i, name_of(spec, i), p));
    if (n >= 3)
        for (int p = 2; p <= o.difference_degree; p += 2)
            b.push_back(basis::difference_monomial(n - 1, name_of(spec, n - 1), 0, name_of(spec, 0), p));
    if (o.constant) b.push_back(basis::constant());
    if (o.gauge_mixed)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            b.push_back(basis::product(pow_atom(basis::coordinate(Slot::Position, i, name_of(spec, i)), 1),
                                       pow_atom(basis::coordinate(Slot::Velocity, j, name_of(spec, j)), 1)));
        }
    if (o.abs_terms)
        for (std::size_t i = 0; i + 1 < n; ++i)
            b.push_back(basis::abs_product(
                Slot::Position, basis::difference(i + 1, name_of(spec, i + 1), i, name_of(spec, i))));
    return b;
}

struct FieldLayout {
    std::vector<BasisDescriptor> bases;
    std::vector<std::size_t> targets;
};

FieldLayout field(const SystemSpec& spec, const LibraryOptions& o) {
    require(spec.spatial.has_value(), ErrorKind::InvalidArgument, "field library needs a grid");
    const std::size_t n = spec.dim;
    const double dx = spec.spatial->dx;
    const bool clamped = spec.spatial->boundary == Boundary::ClampedFree;
    require(o.window_first >= 1 && o.window_last + 2 <= n && o.window_first < o.window_last,
            ErrorKind::InvalidArgument, "sensor window must lie strictly inside the grid");
    FieldLayout f;
    auto& b = f.bases;
    if (o.constant) b.push_back(basis::constant());
    auto tag = [](BasisDescriptor d, const std::string& family) {
        d.family = family;
        return d;
    };
    for (std::size_t i = o.window_first; i <= o.window_last; ++i) {
        const std::string nm = name_of(spec, i);
        b.push_back(tag(basis::kinetic(i, nm), "0.5*u_t^2"));
        b.push_back(tag(basis::monomial(i, nm, 2), "u^2"));
        if (o.field_quartic) b.push_back(tag(basis::monomial(i, nm, 4), "u^4"));
        if (o.field_curvature)
            b.push_back(basis::spatial_derivative_monomial(basis::curvature(i, dx, clamped), 2, 2, "u_xx^2"));
    }
    for (std::size_t e = o.window_first - 1; e <= o.window_last; ++e)
        b.push_back(basis::spatial_derivative_monomial(basis::gradient_edge(e, dx), 1, 2, "u_x^2"));
    for (std::size_t i = o.window_first; i <= o.window_last; ++i) {
        // A node is a target when every stencil term through it is in the library.
        if (o.field_curvature && (i == o.window_first || i == o.window_last)) continue;
        f.targets.push_back(i);
    }
    return f;
}

}  // namespace

std::vector<CandidateLibrary> build_lagrangian_library(const SystemSpec& spec,
                                                       const LibraryOptions& o) {
    require(o.position_degree >= 2, ErrorKind::InvalidArgument,
            "position degree cap must be at least 2");
    std::vector<CandidateLibrary> libs;
    auto make = [&](const std::vector<BasisDescriptor>& bases, std::size_t target) {
        CandidateLibrary lib;
        lib.bases = bases;
        lib.target_coord = target;
        bool found = false;
        for (std::size_t j = 0; j < bases.size(); ++j)
            if (bases[j].is_kinetic_of(target)) {
                lib.kinetic_index = j;
                found = true;
            }
        require(found, ErrorKind::InvalidArgument, "library lacks the kinetic basis of the target");
        lib.validate();
        libs.push_back(std::move(lib));
    };
    if (spec.kind == SystemKind::ContinuousSpde) {
        const auto f = field(spec, o);
        for (auto t : f.targets) make(f.bases, t);
    } else if (spec.dim == 1) {
        make(single_dof(spec, o), 0);
    } else {
        const auto b = chain(spec, o);
        for (std::size_t i = 0; i < spec.dim; ++i) make(b, i);
    }
    return libs;
}

DiffusionOptions default_diffusion_options(const std::string& system) {
    DiffusionOptions o;
    if (system == "harmonic" || system == "pendulum" || system == "duffing") {
        o.families = {"1",     "u",      "u_t",      "u^2",      "u*u_t",    "u^3",
                      "|u|",   "u|u|",   "u_t^3",    "sin(u_t)", "cos(u_t)", "u_t|u_t|"};
    } else if (system == "3dof") {
        o.families = {"1", "u", "u_t", "u^2", "u_t^2", "u|u|", "(u_n-u_1)^2"};
    } else if (system == "wave") {
        o.families = {"1", "mean(u)^2", "u^2", "u_t^2"};
    } else if (system == "beam") {
        o.families = {"1", "mean(u)^2", "u^2", "u_t^2"};
        o.node_first = 1;
        o.node_last = 99;
    } else {
        fail(ErrorKind::Lookup, fmt::format("no default diffusion library for system '{}'", system));
    }
    return o;
}

std::vector<BasisDescriptor> build_diffusion_library(const SystemSpec& spec,
                                                     const DiffusionOptions& o) {
    require(!o.families.empty(), ErrorKind::InvalidArgument, "diffusion library options are empty");
    const std::size_t first = o.node_first.value_or(0);
    const std::size_t last = o.node_last.value_or(spec.dim - 1);
    require(first <= last && last < spec.dim, ErrorKind::InvalidArgument,
            "diffusion node range outside the system");
    std::vector<std::size_t> all(spec.dim);
    for (std::size_t i = 0; i < spec.dim; ++i) all[i] = i;
    const bool field_sys = spec.kind == SystemKind::ContinuousSpde;

    std::vector<BasisDescriptor> out;
    auto per_coord = [&](const std::string& token) {
        for (std::size_t i = first; i <= last; ++i) {
            const std::string nm = name_of(spec, i);
            const auto X = basis::coordinate(Slot::Position, i, nm);
            const auto V = basis::coordinate(Slot::Velocity, i, nm);
            BasisDescriptor d;
            if (token == "u") d = basis::monomial(i, nm, 1);
            else if (token == "u_t") d = basis::velocity_monomial(i, nm, 1);
            else if (token == "u^2") d = basis::monomial(i, nm, 2);
            else if (token == "u*u_t") d = basis::product(pow_atom(X, 1), pow_atom(V, 1));
            else if (token == "u_t^2") d = basis::velocity_monomial(i, nm, 2);
            else if (token == "u^3") d = basis::monomial(i, nm, 3);
            else if (token == "u_t^3") d = basis::velocity_monomial(i, nm, 3);
            else if (token == "|u|") d = basis::abs_value(Slot::Position, X);
            else if (token == "u|u|") d = basis::abs_product(Slot::Position, X);
            else if (token == "sin(u)") d = basis::trig(Func::Sin, Slot::Position, i, nm, 1.0);
            else if (token == "sin(u_t)") d = basis::trig(Func::Sin, Slot::Velocity, i, nm, 1.0);
            else if (token == "cos(u_t)") d = basis::trig(Func::Cos, Slot::Velocity, i, nm, 1.0);
            else if (token == "u_t|u_t|") d = basis::abs_product(Slot::Velocity, V);
            else fail(ErrorKind::InvalidArgument, fmt::format("unknown diffusion family '{}'", token));
            if (field_sys) d.family = token;
            out.push_back(std::move(d));
        }
    };
    for (const auto& token : o.families) {
        if (token == "1") {
            out.push_back(basis::constant());
        } else if (token == "mean(u)^2") {
            auto d = basis::mean_monomial(Slot::Position, all, "u", 2);
            out.push_back(d);
        } else if (token == "(u_n-u_1)^2") {
            require(spec.dim >= 2, ErrorKind::InvalidArgument, "end-to-end difference needs 2 coordinates");
            out.push_back(basis::difference_monomial(spec.dim - 1, name_of(spec, spec.dim - 1), 0,
                                                     name_of(spec, 0), 2));
        } else {
            per_coord(token);
        }
    }
    std::set<std::string> seen;
    for (const auto& d : out)
        require(seen.insert(d.label).second, ErrorKind::InvalidArgument,
                fmt::format("duplicate diffusion basis '{}'", d.label));
    return out;
}

namespace {

/// y[t] = sum_k w_k q_k[t] for realization r, with q the displacement, velocity or acceleration.
void form_series(const LinearForm& f, const Ensemble& e, std::size_t r, int which,
                 const std::vector<std::vector<double>>* accel, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& [c, w] : f.terms) {
        require(c < e.coords, ErrorKind::Schema,
                fmt::format("basis references coordinate {} but the ensemble has {}", c, e.coords));
        std::span<const double> q;
        if (which == 0) q = e.u(r, c);
        else if (which == 1) q = e.v(r, c);
        else q = (*accel)[c];
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += w * q[t];
    }
}

struct ElWorkspace {
    std::vector<double> y, ydot, z, zdot;
    std::vector<std::vector<double>> accel;
    std::vector<bool> have;
};

/// Adds scale * EL_target(D) along realization r into out.
void accumulate_el(const BasisDescriptor& d, double coef, std::size_t target, const Ensemble& e,
                   std::size_t r, numdiff::Scheme scheme, ElWorkspace& ws, std::span<double> out) {
    const std::size_t nt = e.n_steps;
    const double wy = d.pos ? d.pos->form.weight(target) : 0.0;
    const double wz = d.vel ? d.vel->form.weight(target) : 0.0;
    if (wy == 0.0 && wz == 0.0) return;
    ws.y.assign(nt, 0.0);
    ws.z.assign(nt, 0.0);
    if (d.pos) form_series(d.pos->form, e, r, 0, nullptr, ws.y);
    if (d.vel) form_series(d.vel->form, e, r, 1, nullptr, ws.z);
    const bool need_ydot = wz != 0.0 && d.pos && !d.pos->is_constant();
    const bool need_zdot = wz != 0.0 && d.vel && !d.vel->is_linear();
    if (need_ydot) {
        ws.ydot.resize(nt);
        form_series(d.pos->form, e, r, 1, nullptr, ws.ydot);
    }
    if (need_zdot) {
        for (const auto& [c, w] : d.vel->form.terms) {
            if (ws.have[c]) continue;
            ws.accel[c].resize(nt);
            numdiff::time_derivative(e.v(r, c), e.dt, scheme, ws.accel[c]);
            ws.have[c] = true;
        }
        ws.zdot.resize(nt);
        form_series(d.vel->form, e, r, 2, &ws.accel, ws.zdot);
    }
    const double s = coef * d.scale;
    for (std::size_t t = 0; t < nt; ++t) {
        const double F = d.pos ? d.pos->value(ws.y[t]) : 1.0;
        const double Fp = d.pos ? d.pos->d1(ws.y[t]) : 0.0;
        const double G = d.vel ? d.vel->value(ws.z[t]) : 1.0;
        double el = 0.0;
        if (wz != 0.0) {
            const double Gp = d.vel->d1(ws.z[t]);
            double dp = 0.0;
            if (need_ydot) dp += Fp * ws.ydot[t] * Gp;
            if (need_zdot) dp += F * d.vel->d2(ws.z[t]) * ws.zdot[t];
            el += wz * dp;
        }
        if (wy != 0.0) el -= wy * Fp * G;
        out[t] += s * el;
    }
}

void reset_workspace(ElWorkspace& ws, std::size_t coords) {
    ws.accel.resize(coords);
    ws.have.assign(coords, false);
}

}  // namespace

std::vector<double> eval_basis(const BasisDescriptor& b, const Ensemble& e, std::size_t r) {
    require(r < e.n_real, ErrorKind::InvalidArgument, "realization index out of range");
    const std::size_t nt = e.n_steps;
    std::vector<double> y(nt, 0.0), z(nt, 0.0), out(nt);
    if (b.pos) form_series(b.pos->form, e, r, 0, nullptr, y);
    if (b.vel) form_series(b.vel->form, e, r, 1, nullptr, z);
    for (std::size_t t = 0; t < nt; ++t) {
        double d = b.scale;
        if (b.pos) d *= b.pos->value(y[t]);
        if (b.vel) d *= b.vel->value(z[t]);
        out[t] = d;
    }
    return out;
}

Eigen::MatrixXd expected_bases(const std::vector<BasisDescriptor>& bases, const Ensemble& e) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<long>(e.n_steps), static_cast<long>(bases.size()));
    for (std::size_t j = 0; j < bases.size(); ++j) {
        for (std::size_t r = 0; r < e.n_real; ++r) {
            const auto col = eval_basis(bases[j], e, r);
            for (std::size_t t = 0; t < e.n_steps; ++t) m(static_cast<long>(t), static_cast<long>(j)) += col[t];
        }
        m.col(static_cast<long>(j)) /= static_cast<double>(e.n_real);
        require(m.col(static_cast<long>(j)).allFinite(), ErrorKind::Numerical,
                fmt::format("basis '{}' produced non-finite values", bases[j].label));
    }
    return m;
}

numdiff::Scheme default_acceleration_scheme(const Ensemble& e) {
    return e.spatial_grid ? numdiff::Scheme::Forward : numdiff::Scheme::Central;
}

ElFeatureMatrix el_transform(const CandidateLibrary& lib, const Ensemble& e) {
    return el_transform(lib, e, default_acceleration_scheme(e));
}

ElFeatureMatrix el_transform(const CandidateLibrary& lib, const Ensemble& e,
                             numdiff::Scheme scheme) {
    lib.validate();
    require(lib.target_coord < e.coords, ErrorKind::Schema, "library target outside the ensemble");
    const std::size_t nt = e.n_steps, m = lib.size();
    ElFeatureMatrix fm;
    fm.labels = lib.labels();
    fm.values = Eigen::MatrixXd::Zero(static_cast<long>(nt), static_cast<long>(m));
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < m; ++j) {
        if (lib.bases[j].max_coord() >= e.coords && lib.bases[j].max_coord() > 0)
            fail(ErrorKind::Schema, fmt::format("basis '{}' references a missing coordinate", lib.bases[j].label));
        if (lib.bases[j].involves(lib.target_coord)) active.push_back(j);
    }
    ElWorkspace ws;
    std::vector<double> col(nt);
    for (std::size_t r = 0; r < e.n_real; ++r) {
        reset_workspace(ws, e.coords);
        for (std::size_t j : active) {
            std::fill(col.begin(), col.end(), 0.0);
            accumulate_el(lib.bases[j], 1.0, lib.target_coord, e, r, scheme, ws, col);
            auto dst = fm.values.col(static_cast<long>(j));
            for (std::size_t t = 0; t < nt; ++t) dst(static_cast<long>(t)) += col[t];
        }
    }
    fm.values /= static_cast<double>(e.n_real);
    for (std::size_t j : active)
        require(fm.values.col(static_cast<long>(j)).allFinite(), ErrorKind::Numerical,
                fmt::format("EL column '{}' is not finite", lib.bases[j].label));
    return fm;
}

void el_residual(const std::vector<BasisDescriptor>& terms, const std::vector<double>& coefs,
                 std::size_t target, const Ensemble& e, std::size_t r, numdiff::Scheme scheme,
                 std::span<double> out) {
    require(terms.size() == coefs.size(), ErrorKind::InvalidArgument, "term/coefficient mismatch");
    require(out.size() == e.n_steps, ErrorKind::InvalidArgument, "residual buffer size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    ElWorkspace ws;
    reset_workspace(ws, e.coords);
    for (std::size_t k = 0; k < terms.size(); ++k)
        if (coefs[k] != 0.0) accumulate_el(terms[k], coefs[k], target, e, r, scheme, ws, out);
}

KineticSplit split_kinetic(const ElFeatureMatrix& fm, const CandidateLibrary& lib) {
    require(lib.kinetic_index < static_cast<std::size_t>(fm.values.cols()) &&
                fm.labels.size() == static_cast<std::size_t>(fm.values.cols()),
            ErrorKind::InvalidArgument, "kinetic index outside the feature matrix");
    KineticSplit s;
    const long k = static_cast<long>(lib.kinetic_index);
    s.label = fm.values.col(k);
    s.features.resize(fm.values.rows(), fm.values.cols() - 1);
    long out = 0;
    for (long j = 0; j < fm.values.cols(); ++j) {
        if (j == k) continue;
        s.features.col(out++) = fm.values.col(j);
        s.labels.push_back(fm.labels[static_cast<std::size_t>(j)]);
        s.columns.push_back(static_cast<std::size_t>(j));
    }
    return s;
}

nlohmann::json library_to_json(const CandidateLibrary& lib) {
    nlohmann::json j;
    j["target_coord"] = lib.target_coord;
    j["kinetic_index"] = lib.kinetic_index;
    j["size"] = lib.size();
    j["bases"] = nlohmann::json::array();
    for (const auto& b : lib.bases) j["bases"].push_back(to_json(b));
    return j;
}

}  // namespace lagdisc
