#include "lagdisc/discovery.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace lagdisc {

namespace {

std::string coord_name(const std::vector<std::string>& names, std::size_t c) {
    return c < names.size() ? names[c] : fmt::format("q{}", c);
}

std::string signed_term(double coef, const std::string& label, int precision, bool first) {
    const std::string mag = fmt::format("{:.{}f}", std::abs(coef), precision);
    if (first) return (coef < 0 ? "-" : "") + mag + "*" + label;
    return (coef < 0 ? " - " : " + ") + mag + "*" + label;
}

nlohmann::json terms_json(const std::vector<Term>& terms) {
    auto arr = nlohmann::json::array();
    for (const auto& t : terms)
        arr.push_back({{"label", t.basis.label}, {"coefficient", t.coefficient}, {"basis", to_json(t.basis)}});
    return arr;
}

bool is_kinetic(const BasisDescriptor& b) {
    return !b.pos && b.vel && b.vel->form.terms.size() == 1 && b.is_kinetic_of(b.vel->form.terms[0].first);
}

}  // namespace

std::string format_terms(const std::vector<Term>& terms, int precision) {
    std::string out;
    for (const auto& t : terms) {
        const bool first = out.empty();
        if (t.coefficient == 1.0 && is_kinetic(t.basis)) {
            out += first ? t.basis.label : " + " + t.basis.label;
            continue;
        }
        out += signed_term(t.coefficient, t.basis.label, precision, first);
    }
    return out.empty() ? "0" : out;
}

std::map<std::string, double> parse_terms(const std::string& text,
                                          const std::vector<std::string>& labels) {
    std::map<std::string, double> out;
    std::vector<std::pair<double, std::string>> pieces;
    std::size_t pos = 0;
    double sign = 1.0;
    while (pos < text.size()) {
        std::size_t next = std::string::npos;
        double next_sign = 1.0;
        for (const char* sep : {" + ", " - "}) {
            const auto k = text.find(sep, pos);
            if (k < next) {
                next = k;
                next_sign = sep[1] == '-' ? -1.0 : 1.0;
            }
        }
        pieces.emplace_back(sign, text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 3;
        sign = next_sign;
    }
    const std::set<std::string> known(labels.begin(), labels.end());
    for (auto [s, piece] : pieces) {
        if (!piece.empty() && piece[0] == '-') {
            s = -s;
            piece.erase(0, 1);
        }
        if (known.count(piece)) {
            out[piece] += s;
            continue;
        }
        const auto star = piece.find('*');
        require(star != std::string::npos, ErrorKind::Schema, "cannot parse term '" + piece + "'");
        const std::string label = piece.substr(star + 1);
        require(known.count(label) > 0, ErrorKind::Schema, "unknown term label '" + label + "'");
        out[label] += s * std::stod(piece.substr(0, star));
    }
    return out;
}

std::vector<Term> pool_terms(const std::vector<ParticleLagrangian>& particles) {
    std::vector<Term> total;
    std::vector<int> counts;
    std::map<std::string, std::size_t> index;
    for (const auto& p : particles)
        for (const auto& t : p.terms) {
            auto it = index.find(t.basis.label);
            if (it == index.end()) {
                index[t.basis.label] = total.size();
                total.push_back(t);
                counts.push_back(1);
            } else {
                total[it->second].coefficient += t.coefficient;
                ++counts[it->second];
            }
        }
    for (std::size_t k = 0; k < total.size(); ++k) total[k].coefficient /= counts[k];
    return total;
}

std::string LagrangianModel::expression(int precision) const { return format_terms(total, precision); }

nlohmann::json LagrangianModel::to_json() const {
    nlohmann::json j;
    j["lambda"] = lambda;
    j["coords"] = coord_names;
    j["expression"] = expression();
    j["total"] = terms_json(total);
    j["particles"] = nlohmann::json::array();
    for (const auto& p : particles)
        j["particles"].push_back({{"target", p.target},
                                  {"name", coord_name(coord_names, p.target)},
                                  {"terms", terms_json(p.terms)},
                                  {"iterations", p.model.iterations_used},
                                  {"converged", p.model.converged},
                                  {"residual_norm", p.model.residual_norm},
                                  {"label_rms", p.label_rms}});
    return j;
}

LagrangianModel discover_lagrangian(const Ensemble& e, const std::vector<CandidateLibrary>& libs,
                                    const DiscoveryOptions& opts) {
    require(!libs.empty(), ErrorKind::InvalidArgument, "no libraries supplied");
    LagrangianModel model;
    model.coord_names = e.coord_names;
    model.lambda = opts.lambda;
    const auto scheme = opts.scheme.value_or(default_acceleration_scheme(e));
    StlsOptions so;
    so.lambda = opts.lambda;
    so.max_iter = opts.max_iter;
    so.standardize = opts.standardize;
    so.rank_tolerance = opts.rank_tolerance;
    for (const auto& lib : libs) {
        auto fm = el_transform(lib, e, scheme);
        // A forward stencil has no increment at the final sample.
        if (scheme == numdiff::Scheme::Forward && fm.values.rows() > 1)
            fm.values.conservativeResize(fm.values.rows() - 1, Eigen::NoChange);
        const auto split = split_kinetic(fm, lib);
        ParticleLagrangian p;
        p.target = lib.target_coord;
        p.reduced_labels = split.labels;
        p.label_rms = split.label.norm() / std::sqrt(static_cast<double>(std::max<long>(1, split.label.size())));
        p.model = stls(-split.features, split.label, so);
        if (p.model.empty)
            fail(ErrorKind::DiscoveryFailure,
                 fmt::format("empty Lagrangian support for '{}' (label RMS {:.4g}, residual norm {:.4g}, "
                             "lambda {:.4g})",
                             coord_name(e.coord_names, p.target), p.label_rms, p.model.residual_norm,
                             opts.lambda));
        p.terms.push_back({lib.bases[lib.kinetic_index], 1.0});
        for (auto k : p.model.active_set)
            p.terms.push_back({lib.bases[split.columns[k]], p.model.coefficients(static_cast<long>(k))});
        model.particles.push_back(std::move(p));
    }
    model.total = pool_terms(model.particles);
    return model;
}

std::optional<double> DiffusionModel::gain_of(std::size_t coord) const {
    for (const auto& p : particles)
        if (p.target == coord && p.status == "ok") return p.gain;
    return std::nullopt;
}

std::string DiffusionModel::expression(int precision) const {
    std::string out;
    for (const auto& p : particles) {
        if (!out.empty()) out += "\n";
        out += fmt::format("[{}] squared gain: {} ; Wiener potential: {} ({})", p.target,
                           format_terms(p.terms, precision), p.potential.empty() ? "-" : p.potential,
                           p.status);
    }
    return out;
}

nlohmann::json DiffusionModel::to_json() const {
    nlohmann::json j;
    j["lambda"] = lambda;
    j["library"] = library_labels;
    j["particles"] = nlohmann::json::array();
    for (const auto& p : particles)
        j["particles"].push_back({{"target", p.target},
                                  {"status", p.status},
                                  {"gain", p.gain},
                                  {"potential", p.potential},
                                  {"squared_potential", p.squared_potential},
                                  {"terms", terms_json(p.terms)},
                                  {"iterations", p.model.iterations_used},
                                  {"residual_norm", p.model.residual_norm}});
    return j;
}

DiffusionModel discover_diffusion(const Ensemble& e, const LagrangianModel& lagrangian,
                                  const std::vector<BasisDescriptor>& library,
                                  const DiscoveryOptions& opts) {
    require(!library.empty(), ErrorKind::InvalidArgument, "diffusion library is empty");
    require(!lagrangian.particles.empty(), ErrorKind::InvalidArgument, "Lagrangian has no particles");
    const std::size_t nt = e.n_steps;
    const long np = static_cast<long>(lagrangian.particles.size());
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<long>(nt), np);
    std::vector<double> r(nt);
    for (long k = 0; k < np; ++k) {
        const auto& p = lagrangian.particles[static_cast<std::size_t>(k)];
        std::vector<BasisDescriptor> bases;
        std::vector<double> coefs;
        for (const auto& t : p.terms) {
            bases.push_back(t.basis);
            coefs.push_back(t.coefficient);
        }
        for (std::size_t real = 0; real < e.n_real; ++real) {
            // The Ito increment needs the forward difference of the velocity.
            el_residual(bases, coefs, p.target, e, real, numdiff::Scheme::Forward, r);
            for (std::size_t t = 0; t < nt; ++t) Y(static_cast<long>(t), k) += r[t] * r[t];
        }
    }
    Y *= e.dt / static_cast<double>(e.n_real);
    Eigen::MatrixXd G = expected_bases(library, e);
    // The Ito increment does not exist at the final sample.
    if (nt > 1) {
        Y.conservativeResize(static_cast<long>(nt) - 1, Eigen::NoChange);
        G.conservativeResize(static_cast<long>(nt) - 1, Eigen::NoChange);
    }

    StlsOptions so;
    so.lambda = opts.lambda;
    so.max_iter = opts.max_iter;
    so.standardize = opts.standardize;
    so.rank_tolerance = opts.rank_tolerance;
    const auto models = stls_batch(G, Y, so);

    DiffusionModel d;
    d.lambda = opts.lambda;
    for (const auto& b : library) d.library_labels.push_back(b.label);
    for (long k = 0; k < np; ++k) {
        ParticleDiffusion pd;
        pd.target = lagrangian.particles[static_cast<std::size_t>(k)].target;
        pd.model = models[static_cast<std::size_t>(k)];
        bool negative = false;
        for (auto j : pd.model.active_set) {
            const double beta = pd.model.coefficients(static_cast<long>(j));
            pd.terms.push_back({library[j], beta});
            negative = negative || beta < 0.0;
        }
        const std::string name = coord_name(lagrangian.coord_names, pd.target);
        if (pd.terms.empty()) {
            pd.status = "empty";
        } else if (negative) {
            pd.status = "sign-error";
        } else if (pd.terms.size() == 1 && pd.terms[0].basis.form == Form::Constant) {
            // A constant squared gain beta is the squared potential beta*u^2, potential sqrt(beta)*u.
            pd.status = "ok";
            pd.gain = std::sqrt(pd.terms[0].coefficient);
            pd.potential = fmt::format("{:.4f}*{}", pd.gain, name);
            pd.squared_potential = fmt::format("{:.4f}*{}^2", pd.terms[0].coefficient, name);
        } else {
            pd.status = "unsupported";
        }
        d.particles.push_back(std::move(pd));
    }
    return d;
}

double CoordinateEquation::drift_value(std::span<const double> u) const {
    double s = 0.0;
    for (const auto& t : drift) s -= t.coefficient * t.atom.value(t.atom.form.eval(u));
    return s;
}

std::string CoordinateEquation::text(int precision) const {
    std::string out = name + "_tt";
    for (const auto& t : drift) out += signed_term(t.coefficient, t.label, precision, false);
    const std::string w = name.empty() ? "W_t" : "W_t[" + name + "]";
    return out + fmt::format(" = {:.{}f}*{}", gain, precision, w);
}

std::map<std::string, double> CoordinateEquation::parameters() const {
    std::map<std::string, double> p;
    for (const auto& t : drift) p[t.label] += t.coefficient;
    p["gain"] = gain;
    return p;
}

std::string FieldEquation::text(int precision) const {
    std::string out = "u_tt";
    for (const auto& [op, k] : operators) out += signed_term(k, op, precision, false);
    return out + fmt::format(" = {:.{}f}*W_t", gain, precision);
}

std::map<std::string, double> FieldEquation::parameters() const {
    auto p = operators;
    p["gain"] = gain;
    return p;
}

std::map<std::string, double> EquationsOfMotion::parameters() const {
    if (field) return field->parameters();
    std::map<std::string, double> p;
    for (const auto& eq : equations)
        for (const auto& [k, v] : eq.parameters()) p[eq.name + ":" + k] = v;
    return p;
}

std::string EquationsOfMotion::text(int precision) const {
    if (field) return field->text(precision);
    std::string out;
    for (const auto& eq : equations) out += (out.empty() ? "" : "\n") + eq.text(precision);
    return out;
}

nlohmann::json EquationsOfMotion::to_json() const {
    nlohmann::json j;
    j["text"] = text();
    j["parameters"] = parameters();
    j["equations"] = nlohmann::json::array();
    for (const auto& eq : equations) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : eq.drift)
            terms.push_back({{"label", t.label}, {"coefficient", t.coefficient}, {"atom", lagdisc::to_json(t.atom)}});
        j["equations"].push_back({{"coord", eq.coord}, {"name", eq.name}, {"gain", eq.gain},
                                  {"drift", terms}, {"text", eq.text()}});
    }
    if (field) j["field"] = {{"operators", field->operators}, {"gain", field->gain}, {"text", field->text()}};
    return j;
}

namespace {

/// True when the EL contribution of F(y) * z to coordinate i vanishes identically.
bool gauge_vanishes(const BasisDescriptor& d, std::size_t i) {
    const double wy = d.pos ? d.pos->form.weight(i) : 0.0;
    const double wz = d.vel->form.weight(i);
    if (!d.pos || d.pos->is_constant()) return true;
    std::set<std::size_t> coords;
    for (const auto& [c, w] : d.pos->form.terms) coords.insert(c);
    for (const auto& [c, w] : d.vel->form.terms) coords.insert(c);
    for (auto c : coords)
        if (std::abs(wz * d.pos->form.weight(c) - wy * d.vel->form.weight(c)) > 1e-12) return false;
    return true;
}

}  // namespace

EquationsOfMotion derive_equations_of_motion(const std::vector<Term>& lagrangian,
                                             const std::vector<std::string>& coord_names,
                                             const std::map<std::size_t, double>& gains,
                                             const std::vector<std::size_t>& coords, bool field) {
    EquationsOfMotion eom;
    for (auto i : coords) {
        CoordinateEquation eq;
        eq.coord = i;
        eq.name = coord_name(coord_names, i);
        if (auto it = gains.find(i); it != gains.end()) eq.gain = it->second;
        for (const auto& t : lagrangian) {
            const auto& d = t.basis;
            if (!d.involves(i) || t.coefficient == 0.0) continue;
            if (d.vel) {
                if (d.is_kinetic_of(i)) {
                    require(t.coefficient == 1.0, ErrorKind::Unsupported,
                            "kinetic term must carry a unit coefficient");
                    continue;
                }
                if (d.vel->is_linear() && gauge_vanishes(d, i)) continue;
                fail(ErrorKind::Unsupported,
                     fmt::format("term '{}' makes the equation of motion of '{}' velocity dependent",
                                 d.label, eq.name));
            }
            const double w = d.pos->form.weight(i);
            const auto [k, da] = d.pos->derivative();
            if (k == 0.0 || w == 0.0) continue;
            const double coef = -t.coefficient * d.scale * w * k;
            auto same = std::find_if(eq.drift.begin(), eq.drift.end(),
                                     [&](const EomTerm& x) { return x.atom == da; });
            if (same != eq.drift.end()) same->coefficient += coef;
            else eq.drift.push_back({coef, da, da.label()});
        }
        eom.equations.push_back(std::move(eq));
    }
    if (field) {
        std::map<std::string, std::pair<double, int>> fam;
        for (const auto& t : lagrangian) {
            if (is_kinetic(t.basis) || t.basis.form == Form::Constant) continue;
            auto& f = fam[t.basis.family];
            f.first += t.coefficient;
            ++f.second;
        }
        FieldEquation fe;
        for (const auto& [family, acc] : fam) {
            const double a = acc.first / acc.second;
            if (family == "u_x^2") fe.operators["u_xx"] += 2.0 * a;
            else if (family == "u_xx^2") fe.operators["u_xxxx"] += -2.0 * a;
            else if (family == "u^2") fe.operators["u"] += -2.0 * a;
            else if (family == "u^4") fe.operators["u^3"] += -4.0 * a;
            else fail(ErrorKind::Unsupported, fmt::format("field term family '{}' has no pooled operator", family));
        }
        double g = 0.0;
        int n = 0;
        for (const auto& [c, v] : gains) {
            g += v;
            ++n;
        }
        fe.gain = n ? g / n : 0.0;
        eom.field = fe;
    }
    return eom;
}

EquationsOfMotion derive_equations_of_motion(const LagrangianModel& lagrangian,
                                             const DiffusionModel& diffusion) {
    std::map<std::size_t, double> gains;
    for (const auto& p : diffusion.particles)
        if (p.status == "ok") gains[p.target] = p.gain;
    std::vector<std::size_t> coords;
    for (const auto& p : lagrangian.particles) coords.push_back(p.target);
    bool field = false;
    for (const auto& t : lagrangian.total)
        if (t.basis.form == Form::SpatialDerivativeMonomial) field = true;
    return derive_equations_of_motion(lagrangian.total, lagrangian.coord_names, gains, coords, field);
}

HamiltonianModel legendre_transform(const std::vector<Term>& lagrangian) {
    HamiltonianModel h;
    for (const auto& t : lagrangian) {
        const auto& d = t.basis;
        if (!d.vel) {
            h.terms.push_back({d, -t.coefficient});
            continue;
        }
        // sum_i u_t,i dD/du_t,i = F(y) z G'(z); for G = z^p this is p*D.
        require(d.vel->func == Func::Pow, ErrorKind::Unsupported,
                fmt::format("term '{}' is not polynomial in the velocities", d.label));
        const double p = d.vel->param;
        if (p == 1.0) continue;
        require(p == 2.0, ErrorKind::Unsupported,
                fmt::format("term '{}' is not quadratic in the velocities", d.label));
        h.terms.push_back({d, t.coefficient});
    }
    return h;
}

HamiltonianModel legendre_transform(const LagrangianModel& lagrangian) {
    return legendre_transform(lagrangian.total);
}

std::vector<Term> induced_lagrangian(const HamiltonianModel& h) {
    std::vector<Term> l;
    for (const auto& t : h.terms) {
        if (!t.basis.vel) {
            l.push_back({t.basis, -t.coefficient});
            continue;
        }
        require(t.basis.vel->func == Func::Pow && t.basis.vel->param == 2.0, ErrorKind::Unsupported,
                fmt::format("Hamiltonian term '{}' is not quadratic in the velocities", t.basis.label));
        l.push_back(t);
    }
    return l;
}

double HamiltonianModel::evaluate(std::span<const double> u, std::span<const double> v) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coefficient * t.basis.eval(u, v);
    return s;
}

std::string HamiltonianModel::expression(int precision) const { return format_terms(terms, precision); }

nlohmann::json HamiltonianModel::to_json() const {
    return {{"expression", expression()}, {"terms", terms_json(terms)}};
}

double relative_error(const std::map<std::string, double>& truth,
                      const std::map<std::string, double>& discovered) {
    double num = 0.0, den = 0.0;
    std::set<std::string> keys;
    for (const auto& [k, v] : truth) keys.insert(k);
    for (const auto& [k, v] : discovered) keys.insert(k);
    for (const auto& k : keys) {
        const auto it = truth.find(k);
        const auto jt = discovered.find(k);
        const double a = it == truth.end() ? 0.0 : it->second;
        const double b = jt == discovered.end() ? 0.0 : jt->second;
        num += (a - b) * (a - b);
        den += a * a;
    }
    require(den > 0.0, ErrorKind::InvalidArgument, "relative error is undefined for a zero truth vector");
    return 100.0 * std::sqrt(num) / std::sqrt(den);
}

}  // namespace lagdisc
