// Copyright 2026 The wgq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wgq/netlist.h"

#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

namespace wgq {

ParseError::ParseError(size_t line, size_t column, const std::string &message)
    : std::runtime_error(fmt::format("line {}, column {}: {}", line, column, message)),
      line(line),
      column(column),
      message(message) {
}

namespace {

struct Token {
    std::string text;
    size_t line;
    size_t col;
};

using Statement = std::vector<Token>;

[[noreturn]] void fail(const Token &at, const std::string &message) {
    throw ParseError(at.line, at.col, message);
}

std::vector<Statement> tokenize(std::string_view text) {
    std::vector<Statement> out;
    Statement current;
    std::string word;
    size_t word_col = 0;
    size_t line = 1;
    size_t col = 1;
    auto flush_word = [&] {
        if (!word.empty()) {
            current.push_back({word, line, word_col});
            word.clear();
        }
    };
    auto flush_statement = [&] {
        flush_word();
        if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    };
    bool comment = false;
    for (size_t i = 0; i < text.size(); i++) {
        char c = text[i];
        if (c == '\n') {
            flush_statement();
            comment = false;
            line++;
            col = 1;
            continue;
        }
        if (!comment) {
            if (c == '#') {
                flush_statement();
                comment = true;
            } else if (c == ';') {
                flush_statement();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                flush_word();
            } else {
                if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
                    throw ParseError(line, col, fmt::format("unexpected control character 0x{:02x}", int(c)));
                }
                if (word.empty()) {
                    word_col = col;
                }
                word.push_back(c);
            }
        }
        col++;
    }
    flush_statement();
    return out;
}

Token sub(const Token &t, size_t offset, std::string text) {
    return {std::move(text), t.line, t.col + offset};
}

/// Splits "key=value" into two located tokens.
std::pair<Token, Token> split_kv(const Token &t) {
    size_t eq = t.text.find('=');
    if (eq == std::string::npos) {
        fail(t, fmt::format("expected key=value, got '{}'", t.text));
    }
    if (eq == 0) {
        fail(t, "missing key before '='");
    }
    if (eq + 1 == t.text.size()) {
        fail(sub(t, eq + 1, ""), fmt::format("missing value for '{}'", t.text.substr(0, eq)));
    }
    return {sub(t, 0, t.text.substr(0, eq)), sub(t, eq + 1, t.text.substr(eq + 1))};
}

uint64_t parse_uint(const Token &t, const char *what) {
    uint64_t v = 0;
    const char *b = t.text.data();
    const char *e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
        fail(t, fmt::format("expected a non-negative integer for {}, got '{}'", what, t.text));
    }
    return v;
}

double parse_double(const Token &t, const char *what) {
    double v = 0;
    const char *b = t.text.data();
    const char *e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || !std::isfinite(v)) {
        fail(t, fmt::format("expected a finite number for {}, got '{}'", what, t.text));
    }
    return v;
}

cplx parse_complex(const Token &t, const char *what) {
    size_t comma = t.text.find(',');
    if (comma == std::string::npos) {
        return {parse_double(t, what), 0.0};
    }
    return {
        parse_double(sub(t, 0, t.text.substr(0, comma)), what),
        parse_double(sub(t, comma + 1, t.text.substr(comma + 1)), what)};
}

Polarization parse_pol(const Token &t) {
    if (t.text == "H") {
        return Polarization::H;
    }
    if (t.text == "V") {
        return Polarization::V;
    }
    fail(t, fmt::format("expected polarization H or V, got '{}'", t.text));
}

class Parser {
   public:
    Circuit run(std::string_view text) {
        auto statements = tokenize(text);
        Token end{"", 1, 1};
        for (const auto &s : statements) {
            end = {"", s.back().line, s.back().col + s.back().text.size()};
            statement(s);
        }
        if (!have_name_) {
            fail(end, "missing 'circuit' statement");
        }
        if (!have_emitters_ || !have_modes_) {
            fail(end, "missing 'emitters' or 'modes' statement");
        }
        if (!have_detect_) {
            fail(end, "missing 'detect' statement");
        }
        if (!have_input_) {
            circuit_.input = {circuit_.modes.front(), Polarization::H,
                              std::vector<EmitterLabel>(circuit_.num_emitters, EmitterLabel::plus)};
        }
        try {
            circuit_.validate();
        } catch (const CircuitError &e) {
            const Token &at = e.component_index.has_value() && *e.component_index < component_at_.size()
                                  ? component_at_[*e.component_index]
                                  : end;
            fail(at, e.what());
        }
        return std::move(circuit_);
    }

   private:
    void statement(const Statement &s) {
        const Token &kw = s[0];
        const std::string &k = kw.text;
        if (k == "circuit") {
            if (have_name_) {
                fail(kw, "duplicate 'circuit' statement");
            }
            if (s.size() != 2) {
                fail(kw, "'circuit' takes exactly one name");
            }
            circuit_.name = s[1].text;
            have_name_ = true;
            return;
        }
        if (!have_name_) {
            fail(kw, "the document must start with 'circuit <name>'");
        }
        if (k == "emitters") {
            if (have_emitters_ || !circuit_.components.empty()) {
                fail(kw, "'emitters' must appear once, before any component");
            }
            if (s.size() != 2) {
                fail(kw, "'emitters' takes exactly one count");
            }
            uint64_t n = parse_uint(s[1], "emitters");
            if (n < 1 || n > MAX_EMITTERS) {
                fail(s[1], fmt::format("emitter count must be in [1, {}]", MAX_EMITTERS));
            }
            circuit_.num_emitters = n;
            have_emitters_ = true;
            return;
        }
        if (k == "modes") {
            if (have_modes_ || !circuit_.components.empty()) {
                fail(kw, "'modes' must appear once, before any component");
            }
            if (s.size() < 2) {
                fail(kw, "'modes' needs at least one label");
            }
            for (size_t i = 1; i < s.size(); i++) {
                uint64_t v = parse_uint(s[i], "mode label");
                if (v > UINT32_MAX) {
                    fail(s[i], "mode label too large");
                }
                SpatialMode m{uint32_t(v)};
                if (!declared_.insert(m).second) {
                    fail(s[i], fmt::format("mode {} declared twice", v));
                }
                circuit_.modes.push_back(m);
            }
            have_modes_ = true;
            return;
        }
        if (!have_emitters_ || !have_modes_) {
            fail(kw, fmt::format("'{}' before the 'emitters' and 'modes' declarations", k));
        }
        if (k == "input") {
            input(s);
            return;
        }
        if (k == "feedforward") {
            feedforward(s);
            return;
        }
        static const std::set<std::string> components = {
            "hwp", "pbs", "bs", "bsprime", "vbs", "mixer", "attenuator", "scatter", "mirror", "detect"};
        if (!components.count(k)) {
            fail(kw, fmt::format("unknown statement '{}'", k));
        }
        if (have_detect_) {
            fail(kw, "no component may follow 'detect'");
        }
        component_at_.push_back(kw);
        if (k == "hwp") {
            auto a = args(s, {"mode", "theta"});
            circuit_.components.push_back(Hwp{mode(a.at("mode")), parse_double(a.at("theta"), "theta")});
        } else if (k == "pbs") {
            pbs(s);
        } else if (k == "bs" || k == "bsprime") {
            auto a = args(s, {"a", "b"});
            MixerConvention conv;
            conv.kind = k == "bs" ? MixerKind::bs : MixerKind::bs_prime;
            circuit_.components.push_back(mixer(a, conv));
        } else if (k == "vbs") {
            auto a = args(s, {"a", "b", "k", "n"});
            MixerConvention conv;
            conv.kind = MixerKind::vbs;
            conv.k = int(parse_uint(a.at("k"), "k"));
            conv.n = int(parse_uint(a.at("n"), "n"));
            if (conv.n < 1 || conv.k >= conv.n) {
                fail(a.at("k"), "vbs needs 0 <= k < n");
            }
            circuit_.components.push_back(mixer(a, conv));
        } else if (k == "mixer") {
            auto a = args(s, {"a", "b", "u00", "u01", "u10", "u11"});
            MixerConvention conv;
            conv.kind = MixerKind::custom;
            conv.custom = {
                parse_complex(a.at("u00"), "u00"),
                parse_complex(a.at("u01"), "u01"),
                parse_complex(a.at("u10"), "u10"),
                parse_complex(a.at("u11"), "u11")};
            if (!conv.custom.is_unitary()) {
                fail(kw, "mixer matrix is not unitary");
            }
            circuit_.components.push_back(mixer(a, conv));
        } else if (k == "attenuator") {
            auto a = args(s, {"mode", "coeff", "sink"});
            const Token &c = a.at("coeff");
            AttenuatorCoefficient coeff;
            if (c.text.rfind("rnom^", 0) == 0) {
                coeff = AttenuatorCoefficient::rnom_power(int(parse_uint(sub(c, 5, c.text.substr(5)), "rnom power")));
            } else {
                coeff = AttenuatorCoefficient::fixed(parse_complex(c, "coeff"));
                if (std::abs(coeff.value) > 1.0 + 1e-12) {
                    fail(c, "attenuator coefficient magnitude exceeds 1");
                }
            }
            circuit_.components.push_back(Attenuator{mode(a.at("mode")), coeff, sink(a.at("sink"))});
        } else if (k == "scatter") {
            auto a = args(s, {"in", "emitter", "out", "sink"});
            uint64_t e = parse_uint(a.at("emitter"), "emitter");
            if (e >= circuit_.num_emitters) {
                fail(a.at("emitter"),
                     fmt::format("emitter index {} out of range for {} emitters", e, circuit_.num_emitters));
            }
            circuit_.components.push_back(
                EmitterScatter{mode(a.at("in")), size_t(e), mode(a.at("out")), sink(a.at("sink"))});
        } else if (k == "mirror") {
            auto a = args(s, {"in", "out"});
            circuit_.components.push_back(Mirror{mode(a.at("in")), mode(a.at("out"))});
        } else if (k == "detect") {
            detect(s);
        }
    }

    std::map<std::string, Token> args(const Statement &s, std::initializer_list<const char *> keys) {
        std::set<std::string> allowed(keys.begin(), keys.end());
        std::map<std::string, Token> out;
        for (size_t i = 1; i < s.size(); i++) {
            auto [key, value] = split_kv(s[i]);
            if (!allowed.count(key.text)) {
                fail(key, fmt::format("unknown argument '{}' for '{}'", key.text, s[0].text));
            }
            if (!out.emplace(key.text, value).second) {
                fail(key, fmt::format("argument '{}' given twice", key.text));
            }
        }
        for (const char *k : keys) {
            if (!out.count(k)) {
                fail(s[0], fmt::format("'{}' is missing argument '{}'", s[0].text, k));
            }
        }
        return out;
    }

    SpatialMode mode(const Token &t) {
        uint64_t v = parse_uint(t, "mode");
        SpatialMode m{uint32_t(std::min<uint64_t>(v, UINT32_MAX))};
        if (v > UINT32_MAX || !declared_.count(m)) {
            fail(t, fmt::format("mode {} is not declared", t.text));
        }
        return m;
    }

    SinkId sink(const Token &t) {
        if (!sinks_.insert(t.text).second) {
            fail(t, fmt::format("sink '{}' is used by more than one component", t.text));
        }
        return SinkId{t.text};
    }

    Mixer mixer(const std::map<std::string, Token> &a, MixerConvention conv) {
        SpatialMode ma = mode(a.at("a"));
        SpatialMode mb = mode(a.at("b"));
        if (ma == mb) {
            fail(a.at("b"), "mixer needs two distinct modes");
        }
        return Mixer{ma, mb, conv};
    }

    /// "(mode,P)" at t.
    std::pair<SpatialMode, Polarization> slot(const Token &t) {
        const std::string &x = t.text;
        size_t comma = x.find(',');
        if (x.size() < 5 || x.front() != '(' || x.back() != ')' || comma == std::string::npos) {
            fail(t, fmt::format("expected (mode,H|V), got '{}'", x));
        }
        SpatialMode m = mode(sub(t, 1, x.substr(1, comma - 1)));
        Polarization p = parse_pol(sub(t, comma + 1, x.substr(comma + 1, x.size() - comma - 2)));
        return {m, p};
    }

    void input(const Statement &s) {
        if (have_input_ || !circuit_.components.empty()) {
            fail(s[0], "'input' must appear once, before any component");
        }
        auto a = args(s, {"mode", "pol", "emitters"});
        circuit_.input.mode = mode(a.at("mode"));
        circuit_.input.pol = parse_pol(a.at("pol"));
        const Token &e = a.at("emitters");
        if (e.text.size() != circuit_.num_emitters) {
            fail(e, fmt::format("expected {} emitter labels, got {}", circuit_.num_emitters, e.text.size()));
        }
        circuit_.input.emitters.clear();
        for (size_t i = 0; i < e.text.size(); i++) {
            char c = e.text[i];
            if (c != '+' && c != '-') {
                fail(sub(e, i, std::string(1, c)), "emitter labels must be '+' or '-'");
            }
            circuit_.input.emitters.push_back(c == '+' ? EmitterLabel::plus : EmitterLabel::minus);
        }
        have_input_ = true;
    }

    void pbs(const Statement &s) {
        if (s.size() < 2) {
            fail(s[0], "'pbs' needs at least one route (mode,P)=out");
        }
        Pbs c;
        std::set<std::pair<SpatialMode, Polarization>> seen;
        for (size_t i = 1; i < s.size(); i++) {
            auto [lhs, rhs] = split_kv(s[i]);
            auto [m, p] = slot(lhs);
            if (!seen.insert({m, p}).second) {
                fail(lhs, "route given twice");
            }
            c.routing.push_back({m, p, mode(rhs)});
        }
        circuit_.components.push_back(std::move(c));
    }

    void detect(const Statement &s) {
        if (s.size() < 2) {
            fail(s[0], "'detect' needs at least one detector id=(mode,P)");
        }
        DetectorBank bank;
        std::set<std::string> ids;
        std::set<std::pair<SpatialMode, Polarization>> keys;
        for (size_t i = 1; i < s.size(); i++) {
            auto [id, rhs] = split_kv(s[i]);
            auto [m, p] = slot(rhs);
            if (!ids.insert(id.text).second) {
                fail(id, fmt::format("detector '{}' declared twice", id.text));
            }
            if (!keys.insert({m, p}).second) {
                fail(rhs, "two detectors watch the same slot");
            }
            bank.detectors.push_back({id.text, m, p});
        }
        circuit_.components.push_back(std::move(bank));
        have_detect_ = true;
    }

    void feedforward(const Statement &s) {
        if (!have_detect_) {
            fail(s[0], "'feedforward' must follow 'detect'");
        }
        if (circuit_.feedforward.has_value()) {
            fail(s[0], "duplicate 'feedforward' statement");
        }
        const auto &bank = std::get<DetectorBank>(circuit_.components.back());
        FeedforwardRule rule;
        std::set<std::string> seen;
        for (size_t i = 1; i < s.size(); i++) {
            auto [id, ops] = split_kv(s[i]);
            bool known = false;
            for (const auto &d : bank.detectors) {
                known = known || d.id == id.text;
            }
            if (!known) {
                fail(id, fmt::format("unknown detector '{}'", id.text));
            }
            if (!seen.insert(id.text).second) {
                fail(id, fmt::format("feedforward for '{}' given twice", id.text));
            }
            if (ops.text.size() != circuit_.num_emitters) {
                fail(ops, fmt::format("expected {} corrections, got {}", circuit_.num_emitters, ops.text.size()));
            }
            for (size_t j = 0; j < ops.text.size(); j++) {
                if (ops.text[j] != 'I' && ops.text[j] != 'Z') {
                    fail(sub(ops, j, ops.text.substr(j, 1)), "corrections must be 'I' or 'Z'");
                }
            }
            rule.entries.push_back({id.text, parse_corrections(ops.text)});
        }
        for (const auto &d : bank.detectors) {
            if (!seen.count(d.id)) {
                fail(s[0], fmt::format("detector '{}' has no feedforward entry", d.id));
            }
        }
        circuit_.feedforward = std::move(rule);
    }

    Circuit circuit_;
    std::set<SpatialMode> declared_;
    std::set<std::string> sinks_;
    std::vector<Token> component_at_;
    bool have_name_ = false;
    bool have_emitters_ = false;
    bool have_modes_ = false;
    bool have_input_ = false;
    bool have_detect_ = false;
};

std::string num(double x) {
    return fmt::format("{}", x);
}

std::string cnum(cplx z) {
    return fmt::format("{},{}", z.real(), z.imag());
}

}  // namespace

Circuit parse_netlist(std::string_view text) {
    return Parser().run(text);
}

std::string serialize_netlist(const Circuit &circuit) {
    std::string out = fmt::format("circuit {}\nemitters {}\nmodes", circuit.name, circuit.num_emitters);
    for (auto m : circuit.modes) {
        out += fmt::format(" {}", m.label);
    }
    std::string labels;
    for (auto e : circuit.input.emitters) {
        labels.push_back(e == EmitterLabel::plus ? '+' : '-');
    }
    out += fmt::format(
        "\ninput mode={} pol={} emitters={}\n", circuit.input.mode.label, pol_char(circuit.input.pol), labels);
    for (const auto &c : circuit.components) {
        if (const auto *p = std::get_if<Pbs>(&c)) {
            out += "pbs";
            for (const auto &r : p->routing) {
                out += fmt::format(" ({},{})={}", r.in.label, pol_char(r.pol), r.out.label);
            }
        } else if (const auto *x = std::get_if<Mixer>(&c)) {
            const auto &conv = x->convention;
            switch (conv.kind) {
                case MixerKind::bs:
                    out += fmt::format("bs a={} b={}", x->a.label, x->b.label);
                    break;
                case MixerKind::bs_prime:
                    out += fmt::format("bsprime a={} b={}", x->a.label, x->b.label);
                    break;
                case MixerKind::vbs:
                    out += fmt::format("vbs a={} b={} k={} n={}", x->a.label, x->b.label, conv.k, conv.n);
                    break;
                case MixerKind::custom:
                    out += fmt::format(
                        "mixer a={} b={} u00={} u01={} u10={} u11={}",
                        x->a.label,
                        x->b.label,
                        cnum(conv.custom.m00),
                        cnum(conv.custom.m01),
                        cnum(conv.custom.m10),
                        cnum(conv.custom.m11));
                    break;
            }
        } else if (const auto *h = std::get_if<Hwp>(&c)) {
            out += fmt::format("hwp mode={} theta={}", h->mode.label, num(h->theta_degrees));
        } else if (const auto *a = std::get_if<Attenuator>(&c)) {
            std::string coeff = a->coefficient.symbolic ? fmt::format("rnom^{}", a->coefficient.power)
                                                        : cnum(a->coefficient.value);
            out += fmt::format("attenuator mode={} coeff={} sink={}", a->mode.label, coeff, a->sink.name);
        } else if (const auto *s = std::get_if<EmitterScatter>(&c)) {
            out += fmt::format(
                "scatter in={} emitter={} out={} sink={}", s->in.label, s->emitter, s->out.label, s->sink.name);
        } else if (const auto *mr = std::get_if<Mirror>(&c)) {
            out += fmt::format("mirror in={} out={}", mr->in.label, mr->out.label);
        } else if (const auto *d = std::get_if<DetectorBank>(&c)) {
            out += "detect";
            for (const auto &k : d->detectors) {
                out += fmt::format(" {}=({},{})", k.id, k.mode.label, pol_char(k.pol));
            }
        }
        out += "\n";
    }
    if (circuit.feedforward.has_value()) {
        out += "feedforward";
        for (const auto &e : circuit.feedforward->entries) {
            out += fmt::format(" {}={}", e.detector, corrections_string(e.ops));
        }
        out += "\n";
    }
    return out;
}

}  // namespace wgq
