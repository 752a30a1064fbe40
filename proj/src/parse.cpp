#include "ndelie/parse.hpp"

#include <cctype>

namespace ndelie {

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr run() {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view s_;
    size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr expr() {
        Expr acc = term();
        for (;;) {
            if (accept('+')) {
                acc = Expr::sum({acc, term()});
            } else if (accept('-')) {
                acc = Expr::sum({acc, -term()});
            } else {
                return acc;
            }
        }
    }

    Expr term() {
        Expr acc = unary();
        for (;;) {
            if (accept('*')) {
                acc = Expr::product({acc, unary()});
            } else if (accept('/')) {
                size_t at = pos_;
                Expr d = unary();
                if (d.is_zero_literal()) throw ParseError("division by zero literal", at);
                acc = acc / d;
            } else {
                return acc;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) {
            skip();
            size_t at = pos_;
            bool neg = false;
            if (accept('-')) neg = true;
            skip();
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) {
                if (accept('(')) {
                    Expr inner = expr();
                    expect(')');
                    Expr n = normalize(inner);
                    if (!n.is_constant() || n.value().get_den() != 1)
                        throw ParseError("exponent must be an integer", at);
                    int k = int(n.value().get_num().get_si());
                    return pow(base, neg ? -k : k);
                }
                throw ParseError("exponent must be an integer", at);
            }
            int k = std::stoi(std::string(s_.substr(start, pos_ - start)));
            return pow(base, neg ? -k : k);
        }
        return base;
    }

    Expr number() {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string digits(s_.substr(start, pos_ - start));
        std::string frac;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            size_t fs = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            frac = std::string(s_.substr(fs, pos_ - fs));
        }
        long exp10 = 0;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t save = pos_++;
            bool neg = false;
            if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) neg = s_[pos_++] == '-';
            size_t es = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (es == pos_) {
                pos_ = save;
            } else {
                exp10 = std::stol(std::string(s_.substr(es, pos_ - es)));
                if (neg) exp10 = -exp10;
            }
        }
        if (digits.empty() && frac.empty()) throw ParseError("malformed number", start);
        mpz_class num((digits.empty() ? "0" : digits) + frac, 10);
        mpz_class den = 1;
        exp10 -= long(frac.size());
        mpz_class ten = 10;
        mpz_class scale;
        mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(exp10)));
        if (exp10 >= 0) {
            num *= scale;
        } else {
            den = scale;
        }
        return Expr(Rational(num, den));
    }

    std::string identifier() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    int primes() {
        int n = 0;
        while (pos_ < s_.size() && s_[pos_] == '\'') {
            ++pos_;
            ++n;
        }
        return n;
    }

    // Returns 0 for t, 1 for t-r.
    int time_argument(size_t at) {
        Expr a = normalize(expr());
        if (structurally_equal(a, Expr::t())) return 0;
        if (structurally_equal(a, normalize(Expr::t() - Expr::delay()))) return 1;
        throw ParseError("function argument must be t or t-r", at);
    }

    Expr primary() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_'))
            throw ParseError(std::string("unexpected '") + c + "'", pos_);
        size_t at = pos_;
        std::string id = identifier();
        int np = primes();
        bool call = peek('(');

        if (id == "x") {
            if (np > 2) throw ParseError("x supports at most two primes", at);
            Jet now[] = {Jet::X, Jet::X1, Jet::X2};
            Jet later[] = {Jet::XR, Jet::X1R, Jet::X2R};
            if (!call) return Expr::jet(now[np]);
            expect('(');
            int delayed = time_argument(pos_);
            expect(')');
            return Expr::jet(delayed ? later[np] : now[np]);
        }
        if (np == 0 && !call) {
            static const std::pair<const char*, Jet> jets[] = {{"t", Jet::T},     {"xr", Jet::XR}, {"x1", Jet::X1},
                                                               {"x1r", Jet::X1R}, {"x2", Jet::X2}, {"x2r", Jet::X2R}};
            for (const auto& [n, j] : jets)
                if (id == n) return Expr::jet(j);
            if (id == "r") return Expr::delay();
            if (id == "pi") return Expr::pi();
            if (id.size() >= 2 && id[0] == 'c' && id.find_first_not_of("0123456789", 1) == std::string::npos)
                return Expr::param(id);
            throw UnknownIdentifier(id, at);
        }
        if (!call) throw ParseError("expected '(' after function name " + id, pos_);

        static const std::pair<const char*, Elementary> elems[] = {{"sin", Elementary::Sin},
                                                                   {"cos", Elementary::Cos},
                                                                   {"exp", Elementary::Exp},
                                                                   {"ln", Elementary::Ln},
                                                                   {"sqrt", Elementary::Sqrt}};
        for (const auto& [n, f] : elems) {
            if (id == n) {
                if (np) throw ParseError("primes on elementary function", at);
                expect('(');
                Expr a = expr();
                expect(')');
                return Expr::apply(f, a);
            }
        }
        static const char* reserved[] = {"t", "r", "pi", "xr", "x1", "x1r", "x2", "x2r"};
        for (const char* n : reserved)
            if (id == n) throw ParseError("'" + id + "' is not a function", at);

        expect('(');
        int delayed = time_argument(pos_);
        if (accept(',')) {
            size_t xat = pos_;
            Expr xa = normalize(expr());
            Jet want = delayed ? Jet::XR : Jet::X;
            if (!(xa.kind() == Expr::Kind::JetVar && xa.jet_tag() == want))
                throw ParseError(delayed ? "field argument must be (t-r,xr)" : "field argument must be (t,x)", xat);
            expect(')');
            if (np) throw ParseError("use subscripts, not primes, on fields", at);
            std::string name = id;
            int dt = 0, dx = 0;
            auto us = id.rfind('_');
            if (us != std::string::npos && us + 1 < id.size()) {
                std::string sub = id.substr(us + 1);
                size_t i = 0;
                while (i < sub.size() && sub[i] == 't') ++i;
                size_t j = i;
                while (j < sub.size() && sub[j] == 'x') ++j;
                if (j == sub.size()) {
                    dt = int(i);
                    dx = int(j - i);
                    name = id.substr(0, us);
                }
            }
            try {
                return Expr::field(name, dt, dx, delayed != 0);
            } catch (const DerivativeOrderError& e) {
                throw ParseError(e.what(), at);
            }
        }
        expect(')');
        try {
            return Expr::fn(id, np, delayed != 0);
        } catch (const DerivativeOrderError& e) {
            throw ParseError(e.what(), at);
        }
    }
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

}  // namespace ndelie
