#include "cubulate/presentation.hpp"

#include "items.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cubulate {

// ---------------------------------------------------------------------------
// Word / symbol helpers

std::string Word::key() const {
    std::string s;
    s.reserve(letters.size() * 3);
    for (std::size_t i = 0; i < letters.size(); ++i) {
        if (i) s.push_back('.');
        s += std::to_string(letters[i]);
    }
    return s;
}

int GraphOfSpaces::factor_index(const std::string& name) const {
    for (std::size_t i = 0; i < factors.size(); ++i)
        if (factors[i].name == name) return static_cast<int>(i);
    return -1;
}

int GraphOfSpaces::symbol_index(const std::string& name) const {
    for (std::size_t i = 1; i < symbols.size(); ++i)
        if (symbols[i].name == name) return static_cast<int>(i);
    return 0;
}

int GraphOfSpaces::symbol_of_generator(int factor, int gen_index) const {
    for (std::size_t i = 1; i < symbols.size(); ++i)
        if (symbols[i].kind == SymbolKind::Generator && symbols[i].factor == factor &&
            symbols[i].gen_index == gen_index)
            return static_cast<int>(i);
    return 0;
}

int GraphOfSpaces::letter_source(Letter l) const {
    const Symbol& s = symbol(l);
    if (s.kind == SymbolKind::Generator) return s.factor;
    const EssentialEdge& e = edges[static_cast<std::size_t>(s.edge)];
    return l > 0 ? e.from_factor : e.to_factor;
}

int GraphOfSpaces::letter_target(Letter l) const {
    const Symbol& s = symbol(l);
    if (s.kind == SymbolKind::Generator) return s.factor;
    const EssentialEdge& e = edges[static_cast<std::size_t>(s.edge)];
    return l > 0 ? e.to_factor : e.from_factor;
}

bool GraphOfSpaces::connected() const {
    if (factors.empty()) return false;
    std::vector<int> parent(factors.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
        return a;
    };
    for (const auto& e : edges) parent[static_cast<std::size_t>(find(e.from_factor))] = find(e.to_factor);
    int root = find(0);
    for (std::size_t i = 1; i < factors.size(); ++i)
        if (find(static_cast<int>(i)) != root) return false;
    return true;
}

bool GraphOfSpaces::is_single_edge_dumbbell() const {
    return factors.size() == 2 && edges.size() == 1 && edges[0].from_factor != edges[0].to_factor;
}

std::string GraphOfSpaces::letter_name(Letter l) const {
    std::string n = symbol(l).name;
    if (l < 0) n += "^-1";
    return n;
}

// ---------------------------------------------------------------------------
// Path bookkeeping

std::optional<int> start_factor(const GraphOfSpaces& g, const Word& w) {
    if (w.empty()) return std::nullopt;
    return g.letter_source(w.letters.front());
}

std::optional<int> end_factor(const GraphOfSpaces& g, const Word& w) {
    if (w.empty()) return std::nullopt;
    return g.letter_target(w.letters.back());
}

bool is_valid_path(const GraphOfSpaces& g, const Word& w) {
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (g.letter_target(w.letters[i]) != g.letter_source(w.letters[i + 1])) return false;
    return true;
}

bool is_closed(const GraphOfSpaces& g, const Word& w) {
    if (w.empty()) return true;
    return is_valid_path(g, w) && *start_factor(g, w) == *end_factor(g, w);
}

void require_valid_path(const GraphOfSpaces& g, const Word& w) {
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (g.letter_target(w.letters[i]) != g.letter_source(w.letters[i + 1]))
            throw Error("word is not an edge path: '" + g.letter_name(w.letters[i]) + "' ends in factor " +
                        g.factors[static_cast<std::size_t>(g.letter_target(w.letters[i]))].name +
                        " but '" + g.letter_name(w.letters[i + 1]) + "' starts elsewhere");
}

// ---------------------------------------------------------------------------
// Normal forms

using detail::Item;
using detail::from_items;
using detail::least_rotation;
using detail::normalize_items;
using detail::reduce_items_once;

Word normalize(const StaggeredComplex& x, const Word& w) {
    require_valid_path(x.graph, w);
    return from_items(normalize_items(x.graph, w));
}

Word cyclic_reduce(const StaggeredComplex& x, const Word& w) {
    const GraphOfSpaces& g = x.graph;
    require_valid_path(g, w);
    if (!is_closed(g, w)) throw Error("cyclic_reduce: word is not closed");
    std::vector<Item> items = normalize_items(g, w);
    // Reduce across the seam by rotating the first item to the back.
    bool changed = true;
    while (changed && items.size() >= 2) {
        changed = false;
        const Item& first = items.front();
        const Item& last = items.back();
        bool seam_merge = (!first.essential && !last.essential && first.factor == last.factor);
        bool seam_cancel = (first.essential && last.essential && first.letter == -last.letter);
        if (seam_merge || seam_cancel) {
            std::rotate(items.begin(), items.begin() + 1, items.end());
            while (reduce_items_once(g, items)) {}
            changed = true;
        }
    }
    return least_rotation(items);
}

std::pair<Word, int> compute_exponent(const StaggeredComplex& x, const Word& w) {
    const GraphOfSpaces& g = x.graph;
    Word c = cyclic_reduce(x, w);
    // Rotate to start at an essential letter so letter-level periodicity is honest.
    std::size_t first_ess = c.size();
    for (std::size_t i = 0; i < c.size(); ++i)
        if (g.is_essential(c.letters[i])) { first_ess = i; break; }
    if (first_ess == c.size()) throw Error("compute_exponent: word uses no essential edge");
    std::vector<Letter> s(c.letters.begin() + static_cast<std::ptrdiff_t>(first_ess), c.letters.end());
    s.insert(s.end(), c.letters.begin(), c.letters.begin() + static_cast<std::ptrdiff_t>(first_ess));
    const std::size_t n = s.size();
    for (std::size_t m = n; m >= 2; --m) {
        if (n % m != 0) continue;
        std::size_t period = n / m;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = s[i] == s[(i + period) % n];
        if (ok) {
            Word p(std::vector<Letter>(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(period)));
            return {p, static_cast<int>(m)};
        }
    }
    return {Word{s}, 1};
}

// ---------------------------------------------------------------------------
// Staggering / exponents

std::vector<StaggeringViolation> validate_staggering(const StaggeredComplex& x) {
    std::vector<StaggeringViolation> out;
    for (std::size_t i = 0; i < x.relators.size(); ++i) {
        for (std::size_t j = i + 1; j < x.relators.size(); ++j) {
            const Relator& a = x.relators[i];
            const Relator& b = x.relators[j];
            if (!x.graph.edge_less(a.max_edge, b.max_edge))
                out.push_back({static_cast<int>(i), static_cast<int>(j),
                               "max edge of relator " + std::to_string(i) + " is not below max edge of relator " +
                                   std::to_string(j)});
            if (!x.graph.edge_less(a.min_edge, b.min_edge))
                out.push_back({static_cast<int>(i), static_cast<int>(j),
                               "min edge of relator " + std::to_string(i) + " is not below min edge of relator " +
                                   std::to_string(j)});
        }
    }
    return out;
}

MinExponent min_exponent(const StaggeredComplex& x) {
    if (x.relators.empty()) throw Error("min_exponent: presentation has no relators");
    int m = x.relators.front().exponent;
    for (const Relator& r : x.relators) m = std::min(m, r.exponent);
    return {m, m < 4};
}

int StaggeredComplex::max_attaching_length() const {
    int w = 0;
    for (const Relator& r : relators) w = std::max(w, static_cast<int>(r.attaching.size()));
    return w;
}

// ---------------------------------------------------------------------------
// Word expression parsing

namespace {

struct WordParser {
    const StaggeredComplex& x;
    const std::string& src;
    std::size_t pos = 0;
    int line;

    WordParser(const StaggeredComplex& cx, const std::string& s, int ln) : x(cx), src(s), line(ln) {}

    void skip_ws() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= src.size();
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(line, static_cast<int>(pos) + 1, msg);
    }

    std::vector<Letter> parse_sequence(bool stop_at_paren) {
        std::vector<Letter> out;
        while (!at_end()) {
            skip_ws();
            char c = src[pos];
            if (c == ')') {
                if (stop_at_paren) return out;
                fail("unmatched ')'");
            }
            std::vector<Letter> atom;
            if (c == '(') {
                ++pos;
                atom = parse_sequence(true);
                skip_ws();
                if (pos >= src.size() || src[pos] != ')') fail("expected ')'");
                ++pos;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos;
                while (pos < src.size() &&
                       (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' || src[pos] == '\''))
                    ++pos;
                std::string name = src.substr(start, pos - start);
                int sym = x.graph.symbol_index(name);
                if (sym == 0) fail("unknown symbol '" + name + "'");
                atom.push_back(sym);
            } else {
                fail(std::string("unexpected character '") + c + "'");
            }
            skip_ws();
            long long power = 1;
            if (pos < src.size() && src[pos] == '^') {
                ++pos;
                skip_ws();
                bool neg = false;
                if (pos < src.size() && (src[pos] == '-' || src[pos] == '+')) {
                    neg = src[pos] == '-';
                    ++pos;
                }
                if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
                    fail("expected integer after '^'");
                power = 0;
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
                    power = power * 10 + (src[pos++] - '0');
                if (neg) power = -power;
            }
            if (power < 0) {
                std::vector<Letter> inv(atom.rbegin(), atom.rend());
                for (Letter& l : inv) l = -l;
                atom = inv;
                power = -power;
            }
            for (long long k = 0; k < power; ++k) out.insert(out.end(), atom.begin(), atom.end());
        }
        if (stop_at_paren) fail("expected ')'");
        return out;
    }
};

// Insert edge letters between syllables of different factors. Only the
// single-edge dumbbell admits an unambiguous completion.
Word autocomplete_edges(const GraphOfSpaces& g, const Word& w, bool closed) {
    bool has_edge_letter = false;
    for (Letter l : w.letters) has_edge_letter |= g.is_essential(l);
    if (has_edge_letter || w.empty()) return w;
    if (!g.is_single_edge_dumbbell()) return w;
    int esym = g.edges[0].symbol;
    int efrom = g.edges[0].from_factor;
    Word out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        Letter l = w.letters[i];
        if (i > 0) {
            int prev = g.letter_target(w.letters[i - 1]);
            int cur = g.letter_source(l);
            if (prev != cur) out.letters.push_back(prev == efrom ? esym : -esym);
        }
        out.letters.push_back(l);
    }
    if (closed && !out.empty()) {
        int last = g.letter_target(out.letters.back());
        int first = g.letter_source(out.letters.front());
        if (last != first) out.letters.push_back(last == efrom ? esym : -esym);
    }
    return out;
}

} // namespace

Word parse_word(const StaggeredComplex& x, const std::string& expr) {
    WordParser p(x, expr, 1);
    Word w{p.parse_sequence(false)};
    w = autocomplete_edges(x.graph, w, is_closed(x.graph, w) || !is_valid_path(x.graph, w));
    require_valid_path(x.graph, w);
    return w;
}

// ---------------------------------------------------------------------------
// Presentation DSL

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

Relator make_relator(const StaggeredComplex& x, const Word& raw, int line) {
    Word closed = autocomplete_edges(x.graph, raw, true);
    if (!is_valid_path(x.graph, closed))
        throw ParseError(line, 1, "relator is not an edge path (edge letters required here)");
    if (!is_closed(x.graph, closed)) throw ParseError(line, 1, "relator word is not a closed path");
    Word c = cyclic_reduce(x, closed);
    bool essential = false;
    for (Letter l : c.letters) essential |= x.graph.is_essential(l);
    if (c.empty() || !essential)
        throw ParseError(line, 1, "relator is conjugate into a factor (uses no essential edge)");
    auto [p, m] = compute_exponent(x, c);
    Relator r;
    r.period = p;
    r.exponent = m;
    for (int k = 0; k < m; ++k)
        r.attaching.letters.insert(r.attaching.letters.end(), p.letters.begin(), p.letters.end());
    for (Letter l : p.letters) {
        if (!x.graph.is_essential(l)) continue;
        int e = x.graph.symbol(l).edge;
        if (r.min_edge < 0 || x.graph.edge_less(e, r.min_edge)) r.min_edge = e;
        if (r.max_edge < 0 || x.graph.edge_less(r.max_edge, e)) r.max_edge = e;
    }
    return r;
}

} // namespace

StaggeredComplex parse_presentation(const std::string& text) {
    StaggeredComplex x;
    x.graph.symbols.push_back(Symbol{});  // 1-based ids
    std::set<std::string> names;

    struct PendingRelator {
        std::string expr;
        int line;
    };
    std::vector<PendingRelator> pending;
    std::vector<std::string> order_spec;
    int order_line = 0;

    std::istringstream in(text);
    std::string rawline;
    int line = 0;
    while (std::getline(in, rawline)) {
        ++line;
        std::string s = rawline;
        if (auto h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
        auto toks = split_ws(s);
        if (toks.empty()) continue;
        const std::string& dir = toks[0];
        if (dir == "factor") {
            if (toks.size() < 4) throw ParseError(line, 1, "usage: factor <Id> (free|abelian) <gen>+");
            FactorSpec f;
            f.name = toks[1];
            if (names.count(f.name)) throw ParseError(line, 1, "duplicate name '" + f.name + "'");
            names.insert(f.name);
            if (toks[2] == "free") f.kind = FactorKind::Free;
            else if (toks[2] == "abelian") f.kind = FactorKind::FreeAbelian;
            else throw ParseError(line, 1, "factor kind must be 'free' or 'abelian'");
            for (std::size_t i = 3; i < toks.size(); ++i) {
                if (names.count(toks[i])) throw ParseError(line, 1, "duplicate name '" + toks[i] + "'");
                names.insert(toks[i]);
                f.generator_names.push_back(toks[i]);
            }
            f.rank = static_cast<int>(f.generator_names.size());
            int fidx = static_cast<int>(x.graph.factors.size());
            for (int gi = 0; gi < f.rank; ++gi) {
                Symbol sym;
                sym.name = f.generator_names[static_cast<std::size_t>(gi)];
                sym.kind = SymbolKind::Generator;
                sym.factor = fidx;
                sym.gen_index = gi;
                x.graph.symbols.push_back(sym);
            }
            x.graph.factors.push_back(std::move(f));
        } else if (dir == "edge") {
            if (toks.size() != 4) throw ParseError(line, 1, "usage: edge <Id> <FactorId> <FactorId>");
            if (names.count(toks[1])) throw ParseError(line, 1, "duplicate name '" + toks[1] + "'");
            names.insert(toks[1]);
            EssentialEdge e;
            e.name = toks[1];
            e.from_factor = x.graph.factor_index(toks[2]);
            e.to_factor = x.graph.factor_index(toks[3]);
            if (e.from_factor < 0 || e.to_factor < 0)
                throw ParseError(line, 1, "unknown factor in edge declaration");
            e.order_rank = static_cast<int>(x.graph.edges.size());
            Symbol sym;
            sym.name = e.name;
            sym.kind = SymbolKind::EssentialEdge;
            sym.edge = static_cast<int>(x.graph.edges.size());
            e.symbol = static_cast<int>(x.graph.symbols.size());
            x.graph.symbols.push_back(sym);
            x.graph.edges.push_back(std::move(e));
        } else if (dir == "relator") {
            std::string expr = s.substr(s.find("relator") + 7);
            pending.push_back({expr, line});
        } else if (dir == "order") {
            if (toks.size() < 3 || toks[1] != "edges")
                throw ParseError(line, 1, "usage: order edges <Id>+");
            order_spec.assign(toks.begin() + 2, toks.end());
            order_line = line;
        } else {
            throw ParseError(line, 1, "unknown directive '" + dir + "'");
        }
    }

    if (x.graph.factors.empty()) throw ParseError(line, 1, "presentation declares no factors");
    if (!order_spec.empty()) {
        if (order_spec.size() != x.graph.edges.size())
            throw ParseError(order_line, 1, "'order edges' must list every essential edge");
        for (std::size_t r = 0; r < order_spec.size(); ++r) {
            int sym = x.graph.symbol_index(order_spec[r]);
            if (sym == 0 || x.graph.symbols[static_cast<std::size_t>(sym)].kind != SymbolKind::EssentialEdge)
                throw ParseError(order_line, 1, "unknown edge '" + order_spec[r] + "' in order directive");
            x.graph.edges[static_cast<std::size_t>(x.graph.symbols[static_cast<std::size_t>(sym)].edge)].order_rank =
                static_cast<int>(r);
        }
    }
    if (!x.graph.connected()) throw ParseError(line, 1, "underlying graph of spaces is disconnected");

    for (const auto& pr : pending) {
        WordParser wp(x, pr.expr, pr.line);
        Word raw{wp.parse_sequence(false)};
        x.relators.push_back(make_relator(x, raw, pr.line));
    }
    auto violations = validate_staggering(x);
    if (!violations.empty()) {
        std::string msg = "staggering violation: " + violations.front().what;
        if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
        throw ParseError(line, 1, msg);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Serialization

std::string word_to_string(const GraphOfSpaces& g, const Word& w) {
    if (w.empty()) return "1";
    std::string out;
    std::size_t i = 0;
    while (i < w.size()) {
        std::size_t j = i;
        while (j < w.size() && w.letters[j] == w.letters[i]) ++j;
        if (!out.empty()) out += " ";
        Letter l = w.letters[i];
        out += g.symbol(l).name;
        long long p = static_cast<long long>(j - i) * (l > 0 ? 1 : -1);
        if (p != 1) out += "^" + std::to_string(p);
        i = j;
    }
    return out;
}

std::string serialize(const StaggeredComplex& x) {
    std::ostringstream os;
    for (const FactorSpec& f : x.graph.factors) {
        os << "factor " << f.name << " " << (f.kind == FactorKind::Free ? "free" : "abelian");
        for (const auto& gn : f.generator_names) os << " " << gn;
        os << "\n";
    }
    for (const EssentialEdge& e : x.graph.edges)
        os << "edge " << e.name << " " << x.graph.factors[static_cast<std::size_t>(e.from_factor)].name << " "
           << x.graph.factors[static_cast<std::size_t>(e.to_factor)].name << "\n";
    if (!x.graph.edges.empty()) {
        std::vector<const EssentialEdge*> by_rank;
        for (const auto& e : x.graph.edges) by_rank.push_back(&e);
        std::sort(by_rank.begin(), by_rank.end(),
                  [](const EssentialEdge* a, const EssentialEdge* b) { return a->order_rank < b->order_rank; });
        os << "order edges";
        for (const auto* e : by_rank) os << " " << e->name;
        os << "\n";
    }
    for (const Relator& r : x.relators) {
        os << "relator (";
        os << word_to_string(x.graph, r.period);
        os << ")^" << r.exponent << "\n";
    }
    return os.str();
}

} // namespace cubulate
