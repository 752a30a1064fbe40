#include "ndelie/spec.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

#include "ndelie/parse.hpp"

namespace ndelie {

using nlohmann::json;

CoeffDescriptor CoeffDescriptor::constant(const Rational& q) {
    if (sgn(q) == 0) return zero();
    CoeffDescriptor c;
    c.kind = Kind::Constant;
    c.expr = Expr(q);
    return c;
}

CoeffDescriptor CoeffDescriptor::named(const std::string& param) {
    CoeffDescriptor c;
    c.kind = Kind::Constant;
    c.expr = Expr::param(param);
    return c;
}

CoeffDescriptor CoeffDescriptor::closed(const Expr& e) {
    for (Jet j : {Jet::X, Jet::XR, Jet::X1, Jet::X1R, Jet::X2, Jet::X2R})
        if (depends_on(e, j)) throw SpecError("coefficient depends on " + jet_name(j));
    if (has_delayed_atoms(e)) throw SpecError("coefficient contains delayed atoms");
    Expr n = normalize(e);
    if (n.is_constant()) return constant(n.value());
    if (n.kind() == Expr::Kind::Param && n.name() != "pi" && n.name() != "r") {
        CoeffDescriptor c = named(n.name());
        return c;
    }
    CoeffDescriptor c;
    c.kind = Kind::Closed;
    c.expr = n;
    return c;
}

CoeffDescriptor CoeffDescriptor::closed(const std::string& text) { return closed(parse(text)); }

CoeffDescriptor CoeffDescriptor::numeric(std::shared_ptr<const NumericFunction> f) {
    if (!f || f->max_order() < 1) throw SpecError("numeric coefficient needs a table with derivatives");
    CoeffDescriptor c;
    c.kind = Kind::Numeric;
    c.table = std::move(f);
    return c;
}

Expr CoeffDescriptor::symbolic(const std::string& slot) const {
    switch (kind) {
        case Kind::Zero: return Expr();
        case Kind::Constant:
        case Kind::Closed: return expr;
        case Kind::Numeric: return Expr::fn(slot);
    }
    return Expr();
}

std::string CoeffDescriptor::describe(const std::string& slot) const {
    switch (kind) {
        case Kind::Zero: return "0";
        case Kind::Constant: return expr.str();
        case Kind::Closed: return expr.str();
        case Kind::Numeric: return slot + "(t) [numeric table]";
    }
    return "?";
}

double Delay::value() const {
    double v = coef.get_d();
    return times_pi ? v * std::numbers::pi : v;
}

Expr Delay::expr() const {
    if (symbolic) return Expr::delay();
    return times_pi ? normalize(Expr(coef) * Expr::pi()) : Expr(coef);
}

std::string Delay::str() const { return symbolic ? "r" : expr().str(); }

Delay Delay::parse(const std::string& text) {
    Expr e = normalize(ndelie::parse(text));
    Delay d;
    if (e.is_constant()) {
        d.coef = e.value();
    } else if (e.kind() == Expr::Kind::Param && e.name() == "pi") {
        d.coef = 1;
        d.times_pi = true;
    } else if (e.kind() == Expr::Kind::Product && e.operands().size() == 2 && e.operands()[0].is_constant() &&
               e.operands()[1].kind() == Expr::Kind::Param && e.operands()[1].name() == "pi") {
        d.coef = e.operands()[0].value();
        d.times_pi = true;
    } else {
        throw SpecError("delay must be a rational or rational multiple of pi: " + text);
    }
    if (sgn(d.coef) <= 0) throw SpecError("delay must be positive");
    return d;
}

CoeffDescriptor& NdeSpec::slot(char s) {
    switch (s) {
        case 'a': return a;
        case 'b': return b;
        case 'c': return c;
        case 'd': return d;
        case 'k': return k;
        case 'h': return h;
    }
    throw SpecError(std::string("unknown coefficient slot ") + s);
}

const CoeffDescriptor& NdeSpec::slot(char s) const { return const_cast<NdeSpec*>(this)->slot(s); }

EquationResidual NdeSpec::equation() const {
    Expr delta = Expr::jet(Jet::X2) + a.symbolic("a") * Expr::jet(Jet::X1) + b.symbolic("b") * Expr::jet(Jet::X1R) +
                 c.symbolic("c") * Expr::x() + d.symbolic("d") * Expr::jet(Jet::XR) +
                 k.symbolic("k") * Expr::jet(Jet::X2R) - h.symbolic("h");
    return {normalize(delta)};
}

FnTable NdeSpec::functions() const {
    FnTable t;
    for (const char* p = kSlots; *p; ++p) {
        const auto& s = slot(*p);
        if (s.kind == CoeffDescriptor::Kind::Numeric) {
            auto f = s.table;
            t.coeffs[std::string(1, *p)] = [f](double x, int k) { return (*f)(x, k); };
        }
    }
    return t;
}

Substitution NdeSpec::delay_binding() const {
    Substitution s;
    if (!r.symbolic) s.params["r"] = r.expr();
    return s;
}

Substitution NdeSpec::coefficient_binding() const {
    Substitution s;
    for (const char* p = kSlots; *p; ++p) {
        std::string name(1, *p);
        const auto& c = slot(*p);
        if (c.kind == CoeffDescriptor::Kind::Numeric) continue;
        Expr e = c.symbolic(name);
        if (e.kind() == Expr::Kind::Fn && e.fn_atom().name == name) continue;
        s.functions[name] = e;
    }
    return s;
}

std::map<std::string, double> NdeSpec::numeric_params() const {
    std::map<std::string, double> p;
    if (!r.symbolic) p["r"] = r.value();
    return p;
}

NdeSpec NdeSpec::generic() {
    NdeSpec s;
    s.name = "generic";
    s.b = CoeffDescriptor::closed(Expr::fn("b"));
    s.c = CoeffDescriptor::closed(Expr::fn("c"));
    s.d = CoeffDescriptor::closed(Expr::fn("d"));
    s.k = CoeffDescriptor::closed(Expr::fn("k"));
    s.r.symbolic = true;
    return s;
}

Expr bind_delay(const Expr& e, const NdeSpec& spec) {
    if (spec.r.symbolic) return normalize(e);
    return substitute(e, spec.delay_binding());
}

namespace {

std::string number_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw SpecError("expected number or string, got " + v.dump());
}

CoeffDescriptor descriptor_from_json(const json& j, const std::string& slot) {
    if (j.is_null()) return CoeffDescriptor::zero();
    if (j.is_number() || j.is_string()) return CoeffDescriptor::closed(number_text(j));
    if (!j.is_object()) throw SpecError("coefficient " + slot + " must be an object");
    std::string kind = j.value("kind", "");
    CoeffDescriptor c;
    try {
        if (kind == "zero") {
            c = CoeffDescriptor::zero();
        } else if (kind == "const") {
            if (!j.contains("value")) throw SpecError("const coefficient " + slot + " needs a value");
            c = CoeffDescriptor::closed(number_text(j["value"]));
            if (c.kind == CoeffDescriptor::Kind::Closed) throw SpecError("const coefficient " + slot + " is not constant");
        } else if (kind == "closed") {
            if (!j.contains("expr") || !j["expr"].is_string()) throw SpecError("closed coefficient " + slot + " needs expr");
            c = CoeffDescriptor::closed(j["expr"].get<std::string>());
        } else if (kind == "numeric-table") {
            if (!j.contains("samples") || !j["samples"].is_array()) throw SpecError("numeric-table " + slot + " needs samples");
            std::vector<double> nodes;
            std::vector<std::vector<double>> vals;
            for (const auto& row : j["samples"]) {
                if (!row.is_array() || row.size() < 3) throw SpecError("numeric-table rows are [t, f, f', ...]");
                nodes.push_back(row[0].get<double>());
                std::vector<double> v;
                for (size_t i = 1; i < row.size(); ++i) v.push_back(row[i].get<double>());
                vals.push_back(std::move(v));
            }
            c = CoeffDescriptor::numeric(std::make_shared<NumericFunction>(std::move(nodes), std::move(vals)));
        } else {
            throw SpecError("unknown coefficient kind '" + kind + "' for " + slot);
        }
    } catch (const SymbolicError& e) {
        throw SpecError("coefficient " + slot + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw SpecError("coefficient " + slot + ": " + e.what());
    }
    if (j.contains("nonvanishing")) c.nonvanishing = j["nonvanishing"].get<bool>();
    return c;
}

json descriptor_to_json(const CoeffDescriptor& c) {
    json j;
    switch (c.kind) {
        case CoeffDescriptor::Kind::Zero: j["kind"] = "zero"; break;
        case CoeffDescriptor::Kind::Constant:
            j["kind"] = "const";
            j["value"] = c.expr.str();
            break;
        case CoeffDescriptor::Kind::Closed:
            j["kind"] = "closed";
            j["expr"] = c.expr.str();
            break;
        case CoeffDescriptor::Kind::Numeric: {
            j["kind"] = "numeric-table";
            json rows = json::array();
            for (size_t i = 0; i < c.table->nodes().size(); ++i) {
                json row = json::array({c.table->nodes()[i]});
                for (double v : c.table->values()[i]) row.push_back(v);
                rows.push_back(row);
            }
            j["samples"] = rows;
            break;
        }
    }
    if (c.nonvanishing) j["nonvanishing"] = *c.nonvanishing;
    return j;
}

}  // namespace

NdeSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("spec must be a JSON object");
    NdeSpec s;
    s.name = j.value("name", "");
    for (const char* p = NdeSpec::kSlots; *p; ++p) {
        std::string name(1, *p);
        s.slot(*p) = descriptor_from_json(j.contains(name) ? j[name] : json(), name);
    }
    if (!j.contains("r")) throw SpecError("spec needs a delay r");
    try {
        s.r = Delay::parse(number_text(j["r"]));
    } catch (const SymbolicError& e) {
        throw SpecError(std::string("delay: ") + e.what());
    }
    if (j.contains("t0")) s.t0 = j["t0"].get<double>();
    if (j.contains("interval")) {
        const auto& iv = j["interval"];
        if (!iv.is_array() || iv.size() != 2) throw SpecError("interval must be [t0, T]");
        s.t0 = iv[0].get<double>();
        s.t_end = iv[1].get<double>();
        if (!(*s.t_end > s.t0)) throw SpecError("interval must have T > t0");
    }
    return s;
}

json spec_to_json(const NdeSpec& s) {
    json j;
    if (!s.name.empty()) j["name"] = s.name;
    for (const char* p = NdeSpec::kSlots; *p; ++p) j[std::string(1, *p)] = descriptor_to_json(s.slot(*p));
    j["r"] = s.r.str();
    j["t0"] = s.t0;
    if (s.t_end) j["interval"] = json::array({s.t0, *s.t_end});
    return j;
}

NdeSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SpecError(std::string("malformed JSON: ") + e.what());
    }
    return spec_from_json(j);
}

}  // namespace ndelie
