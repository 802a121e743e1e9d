#include "lagdisc/basis.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace lagdisc {

double LinearForm::weight(std::size_t coord) const {
    double w = 0.0;
    for (const auto& [c, wc] : terms)
        if (c == coord) w += wc;
    return w;
}

double LinearForm::eval(std::span<const double> state) const {
    double y = 0.0;
    for (const auto& [c, w] : terms) y += w * state[c];
    return y;
}

bool LinearForm::operator==(const LinearForm& o) const {
    return slot == o.slot && terms == o.terms;
}

namespace {

double sgn(double y) { return (y > 0.0) - (y < 0.0); }

std::string number(double x) {
    if (x == std::round(x) && std::abs(x) < 1e6) return fmt::format("{}", static_cast<long long>(x));
    return fmt::format("{:g}", x);
}

std::string wrapped(const LinearForm& f) { return f.compound ? "(" + f.label + ")" : f.label; }

}  // namespace

double Atom::value(double y) const {
    switch (func) {
        case Func::Pow: return std::pow(y, param);
        case Func::Sin: return std::sin(param * y);
        case Func::Cos: return std::cos(param * y);
        case Func::AbsProduct: return y * std::abs(y);
        case Func::Abs: return std::abs(y);
        case Func::Sign: return sgn(y);
    }
    return 0.0;
}

double Atom::d1(double y) const {
    switch (func) {
        case Func::Pow: return param == 0.0 ? 0.0 : param * std::pow(y, param - 1.0);
        case Func::Sin: return param * std::cos(param * y);
        case Func::Cos: return -param * std::sin(param * y);
        case Func::AbsProduct: return 2.0 * std::abs(y);
        case Func::Abs: return sgn(y);
        case Func::Sign: return 0.0;
    }
    return 0.0;
}

double Atom::d2(double y) const {
    switch (func) {
        case Func::Pow:
            return (param == 0.0 || param == 1.0) ? 0.0
                                                  : param * (param - 1.0) * std::pow(y, param - 2.0);
        case Func::Sin: return -param * param * std::sin(param * y);
        case Func::Cos: return -param * param * std::cos(param * y);
        case Func::AbsProduct: return 2.0 * sgn(y);
        case Func::Abs:
        case Func::Sign: return 0.0;
    }
    return 0.0;
}

std::pair<double, Atom> Atom::derivative() const {
    Atom d = *this;
    switch (func) {
        case Func::Pow:
            if (param == 0.0) return {0.0, d};
            d.param = param - 1.0;
            return {param, d};
        case Func::Sin: d.func = Func::Cos; return {param, d};
        case Func::Cos: d.func = Func::Sin; return {-param, d};
        case Func::AbsProduct: d.func = Func::Abs; d.param = 1.0; return {2.0, d};
        case Func::Abs: d.func = Func::Sign; return {1.0, d};
        case Func::Sign: return {0.0, d};
    }
    return {0.0, d};
}

bool Atom::is_constant() const { return func == Func::Pow && param == 0.0; }

std::string Atom::label() const {
    const std::string& l = form.label;
    switch (func) {
        case Func::Pow:
            if (param == 0.0) return "1";
            if (param == 1.0) return wrapped(form);
            return wrapped(form) + "^" + number(param);
        case Func::Sin: return param == 1.0 ? "sin(" + l + ")" : "sin(" + number(param) + "*" + wrapped(form) + ")";
        case Func::Cos: return param == 1.0 ? "cos(" + l + ")" : "cos(" + number(param) + "*" + wrapped(form) + ")";
        case Func::AbsProduct: return wrapped(form) + "|" + l + "|";
        case Func::Abs: return "|" + l + "|";
        case Func::Sign: return "sgn(" + l + ")";
    }
    return l;
}

bool Atom::operator==(const Atom& o) const {
    return form == o.form && func == o.func && param == o.param;
}

const char* to_string(Form f) {
    switch (f) {
        case Form::Constant: return "constant";
        case Form::Monomial: return "monomial";
        case Form::DifferenceMonomial: return "difference-monomial";
        case Form::Trig: return "trig";
        case Form::VelocityMonomial: return "velocity-monomial";
        case Form::SpatialDerivativeMonomial: return "spatial-derivative-monomial";
        case Form::AbsProduct: return "abs-product";
        case Form::Abs: return "abs";
        case Form::Product: return "product";
        case Form::MeanMonomial: return "mean-monomial";
    }
    return "unknown";
}

double BasisDescriptor::eval(std::span<const double> u, std::span<const double> v) const {
    double d = scale;
    if (pos) d *= pos->value(pos->form.eval(u));
    if (vel) d *= vel->value(vel->form.eval(v));
    return d;
}

double BasisDescriptor::d_du(std::size_t coord, std::span<const double> u,
                             std::span<const double> v) const {
    if (!pos) return 0.0;
    const double w = pos->form.weight(coord);
    if (w == 0.0) return 0.0;
    double d = scale * w * pos->d1(pos->form.eval(u));
    if (vel) d *= vel->value(vel->form.eval(v));
    return d;
}

double BasisDescriptor::d_dut(std::size_t coord, std::span<const double> u,
                              std::span<const double> v) const {
    if (!vel) return 0.0;
    const double w = vel->form.weight(coord);
    if (w == 0.0) return 0.0;
    double d = scale * w * vel->d1(vel->form.eval(v));
    if (pos) d *= pos->value(pos->form.eval(u));
    return d;
}

bool BasisDescriptor::involves(std::size_t coord) const {
    return (pos && pos->form.weight(coord) != 0.0) || (vel && vel->form.weight(coord) != 0.0);
}

std::size_t BasisDescriptor::max_coord() const {
    std::size_t m = 0;
    for (const auto* a : {pos ? &*pos : nullptr, vel ? &*vel : nullptr})
        if (a)
            for (const auto& [c, w] : a->form.terms) m = std::max(m, c);
    return m;
}

bool BasisDescriptor::is_kinetic_of(std::size_t coord) const {
    return !pos && vel && vel->func == Func::Pow && vel->param == 2.0 && scale == 0.5 &&
           vel->form.terms.size() == 1 && vel->form.terms[0].first == coord &&
           vel->form.terms[0].second == 1.0;
}

nlohmann::json to_json(const LinearForm& f) {
    nlohmann::json j;
    j["slot"] = f.slot == Slot::Position ? "u" : "u_t";
    j["label"] = f.label;
    j["compound"] = f.compound;
    j["terms"] = nlohmann::json::array();
    for (const auto& [c, w] : f.terms) j["terms"].push_back({c, w});
    return j;
}

namespace {

const char* func_name(Func f) {
    switch (f) {
        case Func::Pow: return "pow";
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::AbsProduct: return "abs-product";
        case Func::Abs: return "abs";
        case Func::Sign: return "sign";
    }
    return "pow";
}

Func func_from(const std::string& s) {
    for (Func f : {Func::Pow, Func::Sin, Func::Cos, Func::AbsProduct, Func::Abs, Func::Sign})
        if (s == func_name(f)) return f;
    fail(ErrorKind::Schema, "unknown atom function '" + s + "'");
}

Form form_from(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(Form::MeanMonomial); ++k)
        if (s == to_string(static_cast<Form>(k))) return static_cast<Form>(k);
    fail(ErrorKind::Schema, "unknown descriptor form '" + s + "'");
}

LinearForm form_from_json(const nlohmann::json& j) {
    LinearForm f;
    f.slot = j.at("slot").get<std::string>() == "u" ? Slot::Position : Slot::Velocity;
    f.label = j.at("label").get<std::string>();
    f.compound = j.at("compound").get<bool>();
    for (const auto& t : j.at("terms")) f.terms.emplace_back(t.at(0).get<std::size_t>(), t.at(1).get<double>());
    return f;
}

Atom atom_from_json(const nlohmann::json& j) {
    Atom a;
    a.form = form_from_json(j.at("form"));
    a.func = func_from(j.at("func").get<std::string>());
    a.param = j.at("param").get<double>();
    return a;
}

}  // namespace

nlohmann::json to_json(const Atom& a) {
    return {{"form", to_json(a.form)}, {"func", func_name(a.func)}, {"param", a.param}};
}

nlohmann::json to_json(const BasisDescriptor& b) {
    nlohmann::json j;
    j["form"] = to_string(b.form);
    j["label"] = b.label;
    j["family"] = b.family;
    j["scale"] = b.scale;
    if (b.pos) j["pos"] = to_json(*b.pos);
    if (b.vel) j["vel"] = to_json(*b.vel);
    return j;
}

BasisDescriptor descriptor_from_json(const nlohmann::json& j) {
    try {
        BasisDescriptor b;
        b.form = form_from(j.at("form").get<std::string>());
        b.label = j.at("label").get<std::string>();
        b.family = j.value("family", b.label);
        b.scale = j.at("scale").get<double>();
        if (j.contains("pos")) b.pos = atom_from_json(j["pos"]);
        if (j.contains("vel")) b.vel = atom_from_json(j["vel"]);
        return b;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, std::string("bad descriptor JSON: ") + e.what());
    }
}

namespace basis {

std::string velocity_name(const std::string& name) { return name + "_t"; }

LinearForm coordinate(Slot slot, std::size_t coord, const std::string& name) {
    LinearForm f;
    f.slot = slot;
    f.terms = {{coord, 1.0}};
    f.label = slot == Slot::Position ? name : velocity_name(name);
    return f;
}

LinearForm difference(std::size_t a, const std::string& name_a, std::size_t b,
                      const std::string& name_b) {
    LinearForm f;
    f.slot = Slot::Position;
    f.terms = {{a, 1.0}, {b, -1.0}};
    f.label = name_a + "-" + name_b;
    f.compound = true;
    return f;
}

LinearForm gradient_edge(std::size_t e, double dx) {
    LinearForm f;
    f.terms = {{e, -1.0 / dx}, {e + 1, 1.0 / dx}};
    f.label = fmt::format("u_x[{}]", e);
    return f;
}

LinearForm curvature(std::size_t j, double dx, bool clamped_root) {
    LinearForm f;
    const double k = 1.0 / (dx * dx);
    if (j == 0) {
        require(clamped_root, ErrorKind::InvalidArgument, "curvature at node 0 needs a clamped root");
        f.terms = {{0, -2.0 * k}, {1, 2.0 * k}};
    } else {
        f.terms = {{j - 1, k}, {j, -2.0 * k}, {j + 1, k}};
    }
    f.label = fmt::format("u_xx[{}]", j);
    return f;
}

namespace {

Atom atom(const LinearForm& f, Func func, double param) {
    Atom a;
    a.form = f;
    a.func = func;
    a.param = param;
    return a;
}

BasisDescriptor finish(BasisDescriptor b) {
    std::string l;
    if (b.pos) l = b.pos->label();
    if (b.vel) l += (l.empty() ? "" : "*") + b.vel->label();
    if (l.empty()) l = "1";
    if (b.scale != 1.0) l = number(b.scale) + "*" + l;
    b.label = l;
    b.family = l;
    return b;
}

}  // namespace

BasisDescriptor constant() {
    BasisDescriptor b;
    b.form = Form::Constant;
    return finish(b);
}

BasisDescriptor monomial(std::size_t coord, const std::string& name, int degree) {
    require(degree >= 1, ErrorKind::InvalidArgument, "monomial degree must be at least 1");
    BasisDescriptor b;
    b.form = Form::Monomial;
    b.pos = atom(coordinate(Slot::Position, coord, name), Func::Pow, degree);
    return finish(b);
}

BasisDescriptor difference_monomial(std::size_t a, const std::string& name_a, std::size_t bb,
                                    const std::string& name_b, int degree) {
    require(degree >= 1 && a != bb, ErrorKind::InvalidArgument, "bad difference monomial");
    BasisDescriptor b;
    b.form = Form::DifferenceMonomial;
    b.pos = atom(difference(a, name_a, bb, name_b), Func::Pow, degree);
    return finish(b);
}

BasisDescriptor trig(Func kind, Slot slot, std::size_t coord, const std::string& name,
                     double frequency) {
    require(kind == Func::Sin || kind == Func::Cos, ErrorKind::InvalidArgument,
            "trig descriptor must be sin or cos");
    BasisDescriptor b;
    b.form = Form::Trig;
    const auto f = coordinate(slot, coord, name);
    if (slot == Slot::Position) b.pos = atom(f, kind, frequency);
    else b.vel = atom(f, kind, frequency);
    return finish(b);
}

BasisDescriptor velocity_monomial(std::size_t coord, const std::string& name, int degree,
                                  double scale) {
    require(degree >= 1, ErrorKind::InvalidArgument, "velocity monomial degree must be at least 1");
    BasisDescriptor b;
    b.form = Form::VelocityMonomial;
    b.scale = scale;
    b.vel = atom(coordinate(Slot::Velocity, coord, name), Func::Pow, degree);
    return finish(b);
}

BasisDescriptor kinetic(std::size_t coord, const std::string& name) {
    return velocity_monomial(coord, name, 2, 0.5);
}

BasisDescriptor abs_product(Slot slot, const LinearForm& form) {
    BasisDescriptor b;
    b.form = Form::AbsProduct;
    if (slot == Slot::Position) b.pos = atom(form, Func::AbsProduct, 1.0);
    else b.vel = atom(form, Func::AbsProduct, 1.0);
    return finish(b);
}

BasisDescriptor abs_value(Slot slot, const LinearForm& form) {
    BasisDescriptor b;
    b.form = Form::Abs;
    if (slot == Slot::Position) b.pos = atom(form, Func::Abs, 1.0);
    else b.vel = atom(form, Func::Abs, 1.0);
    return finish(b);
}

BasisDescriptor product(const Atom& pos, const Atom& vel) {
    require(pos.form.slot == Slot::Position && vel.form.slot == Slot::Velocity,
            ErrorKind::InvalidArgument, "product needs a position atom and a velocity atom");
    BasisDescriptor b;
    b.form = Form::Product;
    b.pos = pos;
    b.vel = vel;
    return finish(b);
}

BasisDescriptor mean_monomial(Slot slot, const std::vector<std::size_t>& coords,
                              const std::string& name, int degree) {
    require(!coords.empty(), ErrorKind::InvalidArgument, "mean needs coordinates");
    LinearForm f;
    f.slot = slot;
    for (auto c : coords) f.terms.emplace_back(c, 1.0 / static_cast<double>(coords.size()));
    f.label = slot == Slot::Position ? "mean(" + name + ")" : "mean(" + velocity_name(name) + ")";
    BasisDescriptor b;
    b.form = Form::MeanMonomial;
    if (slot == Slot::Position) b.pos = atom(f, Func::Pow, degree);
    else b.vel = atom(f, Func::Pow, degree);
    return finish(b);
}

BasisDescriptor spatial_derivative_monomial(const LinearForm& stencil, int order, int degree,
                                            const std::string& family) {
    require(order >= 1 && order <= 2 && degree >= 1, ErrorKind::InvalidArgument,
            "spatial derivative monomial needs order 1..2 and degree >= 1");
    BasisDescriptor b;
    b.form = Form::SpatialDerivativeMonomial;
    b.pos = atom(stencil, Func::Pow, degree);
    b = finish(b);
    b.family = family;
    return b;
}

}  // namespace basis

}  // namespace lagdisc
