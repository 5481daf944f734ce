#include "specforge/diagrams.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "specforge/errors.hpp"

namespace specforge::diagrams {

std::string tag(const Interaction& ix) {
    if (ix.side == Side::ket) return ix.dir == Dir::up ? "Ku" : "Kd";
    return ix.dir == Dir::up ? "Bu" : "Bd";
}

std::string to_dsl(const Diagram& d) {
    if (d.interactions.empty()) return "()";
    std::string out = "(";
    for (std::size_t i = 0; i < d.interactions.size(); ++i) {
        if (i) out += ",";
        out += "(" + tag(d.interactions[i]) + "," +
               std::to_string(d.interactions[i].pulse_index) + ")";
    }
    out += ")";
    return out;
}

namespace {

struct Walk {
    long long ket = 0;
    long long bra = 0;
    int bra_count = 0;

    void apply(const Interaction& ix) {
        long long& level = (ix.side == Side::ket) ? ket : bra;
        level += (ix.dir == Dir::up) ? 1 : -1;
        if (ix.side == Side::bra) ++bra_count;
    }
};

// Classifies an interaction sequence, throwing on invalid ones. pos_of
// supplies an error location for interaction n.
template <typename PosFn>
Diagram finish_diagram(std::vector<Interaction> interactions, PosFn pos_of) {
    Walk walk;
    for (std::size_t n = 0; n < interactions.size(); ++n) {
        walk.apply(interactions[n]);
        if (walk.ket < 0 || walk.bra < 0)
            throw ValidationError(
                "diagram: running excitation drops below zero at " + pos_of(n));
        if (n + 1 < interactions.size() &&
            interactions[n + 1].pulse_index < interactions[n].pulse_index)
            throw ValidationError("diagram: pulse indices must be "
                                  "nondecreasing at " + pos_of(n + 1));
    }
    Diagram d;
    d.interactions = std::move(interactions);
    d.sign = (walk.bra_count % 2 == 0) ? 1 : -1;
    if (walk.ket == walk.bra) {
        d.detection = Detection::population;
        d.final_excitation = static_cast<std::size_t>(walk.ket);
    } else if (walk.ket == walk.bra + 1) {
        d.detection = Detection::polarization;  // implicit ket emission
        d.final_excitation = static_cast<std::size_t>(walk.bra);
    } else {
        throw ValidationError(
            "diagram: sequence cannot terminate (final ket level " +
            std::to_string(walk.ket) + ", bra level " +
            std::to_string(walk.bra) + "); a population state must remain "
            "after the final emission");
    }
    return d;
}

struct Lexer {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    void expect(char c, const char* what) {
        skip_ws();
        if (pos >= s.size() || s[pos] != c)
            throw ParseError(std::string("diagram DSL: expected '") + c +
                             "' (" + what + ") at position " +
                             std::to_string(pos));
        ++pos;
    }
    std::string position() const { return "position " + std::to_string(pos); }
};

Interaction parse_tuple(Lexer& lex) {
    lex.expect('(', "interaction tuple");
    lex.skip_ws();
    const std::size_t tag_pos = lex.pos;
    // optional quote around the tag
    char quote = '\0';
    if (lex.pos < lex.s.size() &&
        (lex.s[lex.pos] == '\'' || lex.s[lex.pos] == '`' ||
         lex.s[lex.pos] == '"')) {
        quote = lex.s[lex.pos];
        ++lex.pos;
    }
    std::string word;
    while (lex.pos < lex.s.size() &&
           std::isalpha(static_cast<unsigned char>(lex.s[lex.pos])))
        word += lex.s[lex.pos++];
    if (quote != '\0') {
        if (lex.pos >= lex.s.size() ||
            (lex.s[lex.pos] != '\'' && lex.s[lex.pos] != '`' &&
             lex.s[lex.pos] != '"'))
            throw ParseError("diagram DSL: unterminated quoted tag at position " +
                             std::to_string(tag_pos));
        ++lex.pos;
    }
    Interaction ix;
    if (word == "Ku") ix = {Side::ket, Dir::up, 0};
    else if (word == "Kd") ix = {Side::ket, Dir::down, 0};
    else if (word == "Bu") ix = {Side::bra, Dir::up, 0};
    else if (word == "Bd") ix = {Side::bra, Dir::down, 0};
    else
        throw ParseError("diagram DSL: unknown tag '" + word +
                         "' at position " + std::to_string(tag_pos));
    lex.expect(',', "tag/index separator");
    lex.skip_ws();
    const std::size_t num_pos = lex.pos;
    std::string digits;
    while (lex.pos < lex.s.size() &&
           std::isdigit(static_cast<unsigned char>(lex.s[lex.pos])))
        digits += lex.s[lex.pos++];
    if (digits.empty())
        throw ParseError("diagram DSL: expected pulse index at position " +
                         std::to_string(num_pos));
    ix.pulse_index = static_cast<std::size_t>(std::stoull(digits));
    lex.expect(')', "tuple close");
    return ix;
}

}  // namespace

Diagram parse(const std::string& dsl) {
    Lexer lex{dsl};
    std::vector<Interaction> interactions;
    std::vector<std::size_t> tuple_pos;

    if (lex.eof())
        throw ParseError("diagram DSL: empty input");
    lex.skip_ws();
    const std::size_t first_paren = lex.pos;
    lex.expect('(', "diagram");
    // "()" is the empty diagram; otherwise a '(' here means an outer list
    // wrapper, anything else starts the single unwrapped tuple's tag.
    bool wrapped = false;
    char c = lex.peek();
    if (c == ')') {
        ++lex.pos;
        if (!lex.eof())
            throw ParseError("diagram DSL: trailing characters at " +
                             lex.position());
        return finish_diagram({}, [](std::size_t) { return std::string(); });
    }
    if (c == '(') {
        wrapped = true;
    } else {
        lex.pos = first_paren;  // the '(' belongs to the first tuple
    }
    while (true) {
        lex.skip_ws();
        tuple_pos.push_back(lex.pos);
        interactions.push_back(parse_tuple(lex));
        c = lex.peek();
        if (c == ',') {
            ++lex.pos;
            continue;
        }
        break;
    }
    if (wrapped) lex.expect(')', "diagram close");
    if (!lex.eof())
        throw ParseError("diagram DSL: trailing characters at " + lex.position());

    return finish_diagram(std::move(interactions), [&](std::size_t n) {
        return "interaction " + std::to_string(n + 1) + " (position " +
               std::to_string(tuple_pos[n]) + ")";
    });
}

std::vector<Diagram> generate(const std::vector<PhasePair>& phase,
                              const std::vector<double>& pulse_times_fs,
                              std::size_t max_manifold) {
    const std::size_t n = phase.size();
    if (n == 0) throw ValidationError("generate: empty phase spec");
    if (n > 20) throw ValidationError("generate: too many pulses");
    for (const auto& p : phase)
        if (!((p.n_minus == 0 && p.n_plus == 1) ||
              (p.n_minus == 1 && p.n_plus == 0)))
            throw ValidationError(
                "generate: each phase pair must be (0,1) or (1,0)");
    if (pulse_times_fs.size() != n && pulse_times_fs.size() != n + 1)
        throw ValidationError("generate: need one arrival time per pulse "
                              "(optionally plus a detection time)");
    std::vector<double> times(pulse_times_fs.begin(),
                              pulse_times_fs.begin() + static_cast<long>(n));
    if (!std::is_sorted(times.begin(), times.end()))
        throw ValidationError("generate: pulse times must be nondecreasing");

    long long net = 0;
    for (const auto& p : phase)
        net += static_cast<long long>(p.n_plus) - static_cast<long long>(p.n_minus);
    if (net != 0 && net != 1) return {};
    const bool polarization = (net == 1);

    // Group tied arrival times; enumerate every relative order inside a group.
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t p = 0; p < n; ++p) {
        if (!groups.empty() && times[groups.back().front()] == times[p])
            groups.back().push_back(p);
        else
            groups.push_back({p});
    }

    std::set<std::string> seen;
    std::vector<Diagram> out;

    // iterate all orderings as the cartesian product of group permutations
    std::vector<std::vector<std::vector<std::size_t>>> perms_per_group;
    for (auto& g : groups) {
        std::vector<std::vector<std::size_t>> perms;
        std::vector<std::size_t> p = g;
        std::sort(p.begin(), p.end());
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
        perms_per_group.push_back(std::move(perms));
    }
    std::vector<std::size_t> choice(groups.size(), 0);

    const auto emit_orderings = [&](const std::vector<std::size_t>& order) {
        // order[k] = pulse occupying time slot k
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            std::vector<Interaction> seq(n);
            bool valid = true;
            Walk walk;
            for (std::size_t slot = 0; slot < n && valid; ++slot) {
                const std::size_t pulse = order[slot];
                const bool plus = phase[pulse].n_plus == 1;
                const bool on_ket = (mask >> slot) & 1u;
                Interaction ix;
                if (on_ket)
                    ix = {Side::ket, plus ? Dir::up : Dir::down, slot};
                else
                    ix = {Side::bra, plus ? Dir::down : Dir::up, slot};
                seq[slot] = ix;
                walk.apply(ix);
                if (walk.ket < 0 || walk.bra < 0) valid = false;
                if (walk.bra > static_cast<long long>(max_manifold))
                    valid = false;
                // The ket may sit one level above the cap only during the
                // final interval of a polarization pathway; the implicit
                // emission steps it straight back down.
                const long long ket_cap =
                    static_cast<long long>(max_manifold) +
                    ((polarization && slot + 1 == n) ? 1 : 0);
                if (walk.ket > ket_cap) valid = false;
            }
            if (!valid) continue;
            if (polarization && walk.ket != walk.bra + 1) continue;
            if (!polarization && walk.ket != walk.bra) continue;
            Diagram d = finish_diagram(std::move(seq),
                                       [](std::size_t) { return std::string(); });
            const std::string key = to_dsl(d);
            if (seen.insert(key).second) out.push_back(std::move(d));
        }
    };

    while (true) {
        std::vector<std::size_t> order;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& p = perms_per_group[g][choice[g]];
            order.insert(order.end(), p.begin(), p.end());
        }
        emit_orderings(order);
        std::size_t g = 0;
        for (; g < groups.size(); ++g) {
            if (++choice[g] < perms_per_group[g].size()) break;
            choice[g] = 0;
        }
        if (g == groups.size()) break;
    }

    std::sort(out.begin(), out.end(), [](const Diagram& a, const Diagram& b) {
        return to_dsl(a) < to_dsl(b);
    });
    return out;
}

std::uint64_t count_terms(unsigned order) {
    if (order < 1) throw ValidationError("count_terms: order must be >= 1");
    if (order > 63) throw ValidationError("count_terms: order too large");
    return std::uint64_t(1) << (order - 1);
}

std::string render_ascii(const Diagram& d) {
    // Built top-down; time runs bottom to top.
    std::vector<std::string> lines;
    const std::string spacer = "        |      |";
    auto arrow_line = [&](const Interaction& ix) {
        // excitation arrows point into the rail, de-excitations out of it
        std::string label = tag(ix) + "@" + std::to_string(ix.pulse_index);
        if (ix.side == Side::ket) {
            const std::string arrow = (ix.dir == Dir::up) ? "-->" : "<--";
            if (label.size() < 5) label += std::string(5 - label.size(), ' ');
            return label + arrow + "|      |";
        }
        const std::string arrow = (ix.dir == Dir::up) ? "<--" : "-->";
        return spacer + arrow + " " + label;
    };

    if (d.detection == Detection::polarization) {
        lines.push_back("   <~~~ |      |   (emission)");
        lines.push_back(spacer);
    }
    for (auto it = d.interactions.rbegin(); it != d.interactions.rend(); ++it) {
        lines.push_back(arrow_line(*it));
        lines.push_back(spacer);
    }
    if (d.interactions.empty() && d.detection != Detection::polarization) {
        lines.push_back(spacer);
        lines.push_back(spacer);
    }
    lines.push_back("       ket    bra   (time runs upward)");

    std::ostringstream out;
    for (const auto& l : lines) out << l << '\n';
    return out.str();
}

}  // namespace specforge::diagrams
