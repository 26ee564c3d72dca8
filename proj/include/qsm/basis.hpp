#pragma once

// Observer-rotated symbol bases. A single-site unitary u rotates the symbol
// basis at every site; projectors become u P u^dagger and the dynamics seen
// through omega becomes V = omega U omega^dagger.

#include "qsm/error.hpp"
#include "qsm/evolution.hpp"
#include "qsm/language.hpp"
#include "qsm/rule_table.hpp"
#include "qsm/semantics.hpp"
#include "qsm/symbol.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace qsm {

class SiteUnitary {
public:
    SiteUnitary(Mode mode, std::vector<Complex> rows) : mode_(mode), d_(alphabet_size(mode)), m_(std::move(rows))
    {
        if (m_.size() != d_ * d_)
            throw Error(ErrorCode::NotUnitary, "site unitary needs " + std::to_string(d_ * d_) + " entries");
        if (unitarity_defect() > 1e-12)
            throw Error(ErrorCode::NotUnitary, "matrix is not unitary (defect " + std::to_string(unitarity_defect()) + ")");
    }

    static SiteUnitary identity(Mode mode)
    {
        auto d = alphabet_size(mode);
        std::vector<Complex> m(d * d);
        for (std::size_t i = 0; i < d; ++i)
            m[i * d + i] = 1.0;
        return SiteUnitary(mode, std::move(m));
    }

    /// Rotation by theta in the (0, P) plane; the other symbols are fixed.
    static SiteUnitary rotation_0p(Mode mode, double theta)
    {
        auto d = alphabet_size(mode);
        std::vector<Complex> m(d * d);
        for (std::size_t i = 0; i < d; ++i)
            m[i * d + i] = 1.0;
        const std::size_t z = index(Symbol::Zero), p = index(Symbol::P);
        m[z * d + z] = std::cos(theta);
        m[z * d + p] = -std::sin(theta);
        m[p * d + z] = std::sin(theta);
        m[p * d + p] = std::cos(theta);
        return SiteUnitary(mode, std::move(m));
    }

    Mode mode() const noexcept { return mode_; }
    std::size_t dim() const noexcept { return d_; }

    /// <row| u |col> in the symbol basis.
    Complex operator()(std::size_t row, std::size_t col) const { return m_[row * d_ + col]; }
    Complex operator()(Symbol row, Symbol col) const { return (*this)(index(row), index(col)); }

    SiteUnitary dagger() const
    {
        std::vector<Complex> m(d_ * d_);
        for (std::size_t r = 0; r < d_; ++r)
            for (std::size_t c = 0; c < d_; ++c)
                m[c * d_ + r] = std::conj(m_[r * d_ + c]);
        return SiteUnitary(mode_, std::move(m));
    }

    bool is_identity(double tol = 1e-15) const
    {
        for (std::size_t r = 0; r < d_; ++r)
            for (std::size_t c = 0; c < d_; ++c)
                if (std::abs(m_[r * d_ + c] - (r == c ? 1.0 : 0.0)) > tol)
                    return false;
        return true;
    }

    double unitarity_defect() const
    {
        double worst = 0;
        for (std::size_t a = 0; a < d_; ++a)
            for (std::size_t b = 0; b < d_; ++b) {
                Complex s{};
                for (std::size_t k = 0; k < d_; ++k)
                    s += std::conj(m_[k * d_ + a]) * m_[k * d_ + b];
                worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
            }
        return worst;
    }

private:
    Mode mode_;
    std::size_t d_;
    std::vector<Complex> m_;
};

/// Accepts nested rows [[[re,im],...],...] or a flat row-major list of
/// [re,im] pairs.
inline SiteUnitary unitary_from_json(const nlohmann::json& j, Mode mode)
{
    const std::size_t d = alphabet_size(mode);
    std::vector<Complex> m;
    auto pair = [](const nlohmann::json& e) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw Error(ErrorCode::ParseError, "matrix entries must be [re, im] pairs");
        return Complex{e[0].get<double>(), e[1].get<double>()};
    };
    if (!j.is_array())
        throw Error(ErrorCode::ParseError, "unitary must be a JSON array");
    if (j.size() == d && !j.empty() && j[0].is_array() && j[0].size() == d && j[0][0].is_array()) {
        for (const auto& row : j) {
            if (!row.is_array() || row.size() != d)
                throw Error(ErrorCode::ParseError, "unitary rows must have " + std::to_string(d) + " entries");
            for (const auto& e : row)
                m.push_back(pair(e));
        }
    } else {
        for (const auto& e : j)
            m.push_back(pair(e));
    }
    if (m.size() != d * d)
        throw Error(ErrorCode::ParseError, "unitary must be " + std::to_string(d) + "x" + std::to_string(d));
    return SiteUnitary(mode, std::move(m));
}

/// "identity", "rot-0P(theta)" or the path of a JSON matrix file.
inline SiteUnitary parse_unitary(const std::string& spec, Mode mode)
{
    if (spec == "identity")
        return SiteUnitary::identity(mode);
    static const std::regex rot(R"(rot-0P\(\s*([-+0-9.eE]+)\s*\))");
    std::smatch match;
    if (std::regex_match(spec, match, rot)) {
        try {
            return SiteUnitary::rotation_0p(mode, std::stod(match[1].str()));
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "bad rotation angle in \"" + spec + "\"");
        }
    }
    std::ifstream in(spec);
    if (!in)
        throw Error(ErrorCode::ParseError, "\"" + spec + "\" is neither a unitary preset nor a readable file");
    try {
        nlohmann::json j;
        in >> j;
        return unitary_from_json(j, mode);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, spec + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Rotated projectors on a sparse state

namespace detail {

inline Tape pattern_0x0(std::span<const Symbol> word)
{
    Tape t(word.size() + 2, Symbol::Zero);
    std::copy(word.begin(), word.end(), t.begin() + 1);
    return t;
}

} // namespace detail

/// Applies |u S><u S| for the pattern S placed at sites a..a+|S|-1,
/// without renormalising.
inline SparseState project_rotated(const SparseState& state, const SiteUnitary& u, const Tape& pattern, std::size_t a,
                                   double eps = kEpsAmp)
{
    const std::size_t b = a + pattern.size() - 1;
    if (a < 1 || b > state.steps())
        throw Error(ErrorCode::PlacementOutOfFrozenRegion, "sites " + std::to_string(a) + ".." + std::to_string(b) +
                                                               " are not frozen at step " +
                                                               std::to_string(state.steps()));
    // <uS|T> factorises over the sites of the interval.
    std::map<Configuration, Complex> overlap;
    for (const auto& [c, amp] : state.terms()) {
        Complex coeff = 1.0;
        for (std::size_t k = 0; k < pattern.size() && coeff != Complex{}; ++k)
            coeff *= std::conj(u(c.tape[a - 1 + k], pattern[k]));
        if (coeff == Complex{})
            continue;
        Configuration rest = c;
        std::fill(rest.tape.begin() + static_cast<std::ptrdiff_t>(a - 1),
                  rest.tape.begin() + static_cast<std::ptrdiff_t>(b), Symbol::Zero);
        overlap[rest] += coeff * amp;
    }

    // Components of u|S> site by site.
    std::vector<std::vector<std::pair<Symbol, Complex>>> column(pattern.size());
    for (std::size_t k = 0; k < pattern.size(); ++k)
        for (std::size_t r = 0; r < u.dim(); ++r)
            if (auto v = u(r, index(pattern[k])); v != Complex{})
                column[k].emplace_back(symbol_at(r), v);

    SparseState out(state.steps());
    for (const auto& [rest, inner] : overlap) {
        if (std::abs(inner) <= eps)
            continue;
        std::vector<std::size_t> pick(pattern.size(), 0);
        while (true) {
            Configuration c = rest;
            Complex amp = inner;
            for (std::size_t k = 0; k < pattern.size(); ++k) {
                c.tape[a - 1 + k] = column[k][pick[k]].first;
                amp *= column[k][pick[k]].second;
            }
            out.accumulate(c, amp);
            std::size_t k = 0;
            while (k < pattern.size() && ++pick[k] == column[k].size())
                pick[k++] = 0;
            if (k == pattern.size())
                break;
        }
    }
    out.prune(eps);
    return out;
}

/// Expectation of the rotated 0X0 projector with its leading 0 at site a.
inline double observer_projector_expectation(const SparseState& state, const SiteUnitary& u, const Word& x,
                                             std::size_t a)
{
    return project_rotated(state, u, detail::pattern_0x0(x.symbols()), a, 0.0).norm2();
}

struct JointPlacement {
    std::size_t a = 0, b = 0; // 0 ~P(X) 0
    std::size_t c = 0, d = 0; // 0 X 0
};

inline JointPlacement joint_placement(const Word& x, std::size_t a, std::size_t c)
{
    return JointPlacement{a, a + x.size() + 5, c, c + x.size() + 1};
}

/// Norm of the rotated 0X0 projection at c applied to `after_first`, the
/// state m steps after the rotated 0~P(X)0 projection.
inline double joint_amplitude_at(const SparseState& after_first, const SiteUnitary& u, const Word& x, std::size_t c)
{
    auto d = c + x.size() + 1;
    if (c < 1 || d > after_first.steps())
        throw Error(ErrorCode::IntervalNotFrozen, "X interval " + std::to_string(c) + ".." + std::to_string(d) +
                                                      " is not frozen at step " + std::to_string(after_first.steps()));
    return std::sqrt(project_rotated(after_first, u, detail::pattern_0x0(x.symbols()), c, 0.0).norm2());
}

/// Rotated first projection of 0~P(X)0 at a, followed by m more steps.
inline SparseState project_negation_and_evolve(const SparseState& at_n, const RuleTable& table, const SiteUnitary& u,
                                               const Word& x, std::size_t a, std::size_t m)
{
    auto sentence = make_sentence(SentenceKind::NegativeP, x).word;
    auto place = joint_placement(x, a, 0);
    if (a < 1 || place.b > at_n.steps())
        throw Error(ErrorCode::IntervalNotFrozen, "~P(X) interval " + std::to_string(a) + ".." +
                                                      std::to_string(place.b) + " is not frozen at step " +
                                                      std::to_string(at_n.steps()));
    auto projected = project_rotated(at_n, u, detail::pattern_0x0(sentence.symbols()), a);
    return evolve_from(std::move(projected), table, m);
}

/// |<0X0 at c| rotated  U^m  rotated |0~P(X)0 at a>  U^n |init>|
inline double rotated_joint_amplitude(const RuleTable& table, const SiteUnitary& u, const Word& x, std::size_t a,
                                      std::size_t c, std::size_t n, std::size_t m)
{
    auto place = joint_placement(x, a, c);
    if (a < 1 || place.b > n)
        throw Error(ErrorCode::IntervalNotFrozen, "~P(X) interval ends at site " + std::to_string(place.b) +
                                                      " but only sites up to " + std::to_string(n) + " are frozen");
    if (c < 1 || place.d > n + m)
        throw Error(ErrorCode::IntervalNotFrozen, "X interval ends at site " + std::to_string(place.d) +
                                                      " but only sites up to " + std::to_string(n + m) + " are frozen");
    auto after = project_negation_and_evolve(evolve(table, n), table, u, x, a, m);
    return joint_amplitude_at(after, u, x, c);
}

// ---------------------------------------------------------------------------
// Transformed dynamics

enum class OmegaVariant { Local, Cumulative };

inline std::string_view to_string(OmegaVariant v) { return v == OmegaVariant::Local ? "local" : "cumulative"; }

inline OmegaVariant omega_from_string(std::string_view text)
{
    if (text == "local")
        return OmegaVariant::Local;
    if (text == "cumulative")
        return OmegaVariant::Cumulative;
    throw Error(ErrorCode::ParseError, "omega must be local or cumulative, got \"" + std::string(text) + "\"");
}

/// State over sites 1..head. Once sites j and j+1 are rotated they need not
/// be blank, so the standard (label, sites 1..n+1) form no longer applies.
class WideState {
public:
    struct Key {
        LabelId label = 0;
        Tape tape;

        friend bool operator<(const Key& a, const Key& b)
        {
            if (a.tape != b.tape)
                return a.tape < b.tape;
            return a.label < b.label;
        }
        friend bool operator==(const Key&, const Key&) = default;
    };
    using Terms = std::map<Key, Complex>;

    explicit WideState(std::size_t head = 2) : head_(head) {}

    static WideState widen(const SparseState& s)
    {
        WideState w(s.steps() + 2);
        for (const auto& [c, amp] : s.terms()) {
            Key k{c.label, c.tape};
            k.tape.push_back(Symbol::Zero);
            w.terms_[k] += amp;
        }
        return w;
    }

    std::size_t head() const noexcept { return head_; }
    const Terms& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    void accumulate(Key k, Complex amp) { terms_[std::move(k)] += amp; }

    void prune(double eps)
    {
        std::erase_if(terms_, [eps](const auto& kv) { return std::abs(kv.second) <= eps; });
    }

    double norm2() const
    {
        double s = 0;
        for (const auto& [k, amp] : terms_)
            s += std::norm(amp);
        return s;
    }

    Complex amplitude(const Key& k) const
    {
        auto it = terms_.find(k);
        return it == terms_.end() ? Complex{} : it->second;
    }

private:
    std::size_t head_;
    Terms terms_;
};

inline WideState apply_site(const WideState& in, const SiteUnitary& u, std::size_t site, double eps = kEpsAmp)
{
    WideState out(in.head());
    for (const auto& [k, amp] : in.terms()) {
        const Symbol s = k.tape[site - 1];
        for (std::size_t r = 0; r < u.dim(); ++r) {
            Complex v = u(r, index(s));
            if (v == Complex{})
                continue;
            auto key = k;
            key.tape[site - 1] = symbol_at(r);
            out.accumulate(std::move(key), amp * v);
        }
    }
    out.prune(eps);
    return out;
}

inline WideState apply_sites(WideState w, const SiteUnitary& u, std::size_t first, std::size_t last,
                             double eps = kEpsAmp)
{
    if (u.is_identity())
        return w;
    for (std::size_t s = first; s <= last; ++s)
        w = apply_site(w, u, s, eps);
    return w;
}

/// U on a wide state; the symbol under the head is read as stored.
inline WideState wide_step(const WideState& in, const RuleTable& table, double eps = kEpsAmp)
{
    const std::size_t j = in.head();
    WideState out(j + 1);
    for (const auto& [k, amp] : in.terms()) {
        RuleInput ri{k.label, k.tape[j - 1], k.tape[j - 2]};
        const auto* outs = table.find(ri);
        if (!outs)
            throw Error(ErrorCode::MissingRule, "no rule for input " + table.describe(ri));
        for (const auto& o : *outs) {
            WideState::Key key{o.label, k.tape};
            key.tape[j - 1] = o.cur;
            key.tape[j - 2] = o.prev;
            key.tape.push_back(Symbol::Zero);
            out.accumulate(std::move(key), amp * o.amp);
        }
    }
    out.prune(eps);
    return out;
}

/// omega at the current head position: u on sites j and j-1 (local) or on
/// every site 1..j (cumulative).
inline WideState apply_omega(const WideState& w, const SiteUnitary& u, OmegaVariant variant, double eps = kEpsAmp)
{
    const std::size_t j = w.head();
    return apply_sites(w, u, variant == OmegaVariant::Local ? j - 1 : 1, j, eps);
}

/// One step of V = omega U omega^dagger. On sites below j-1 the cumulative
/// omega and omega^dagger cancel, so both variants touch at most three sites.
inline WideState conjugated_step(const WideState& in, const RuleTable& table, const SiteUnitary& u,
                                 OmegaVariant variant, double eps = kEpsAmp)
{
    const std::size_t j = in.head();
    auto w = apply_sites(in, u.dagger(), j - 1, j, eps);
    w = wide_step(w, table, eps);
    return apply_sites(w, u, variant == OmegaVariant::Local ? j : j - 1, j + 1, eps);
}

class TransformedDynamics {
public:
    TransformedDynamics(const RuleTable& table, SiteUnitary u, OmegaVariant variant)
        : table_(table), u_(std::move(u)), variant_(variant)
    {
    }

    WideState initial() const { return apply_omega(WideState::widen(initial_state(table_)), u_, variant_); }

    /// V^n omega |init> computed as omega U^n |init>.
    WideState evolve(std::size_t n) const { return apply_omega(WideState::widen(qsm::evolve(table_, n)), u_, variant_); }

    /// V^n omega |init> by n explicit conjugated steps.
    WideState evolve_direct(std::size_t n) const
    {
        auto w = initial();
        for (std::size_t k = 0; k < n; ++k)
            w = conjugated_step(w, table_, u_, variant_);
        return w;
    }

    WideState step(const WideState& w) const { return conjugated_step(w, table_, u_, variant_); }

    const SiteUnitary& unitary() const noexcept { return u_; }
    OmegaVariant variant() const noexcept { return variant_; }

private:
    const RuleTable& table_;
    SiteUnitary u_;
    OmegaVariant variant_;
};

inline double max_deviation(const WideState& a, const WideState& b)
{
    if (a.head() != b.head())
        return std::numeric_limits<double>::infinity();
    double worst = 0;
    for (const auto& [k, amp] : a.terms())
        worst = std::max(worst, std::abs(amp - b.amplitude(k)));
    for (const auto& [k, amp] : b.terms())
        if (!a.terms().count(k))
            worst = std::max(worst, std::abs(amp));
    return worst;
}

// ---------------------------------------------------------------------------
// Commutation of U with omega

struct CommutationReport {
    double max_defect = 0;
    std::string witness; // input block (label, s_j+1, s_j, s_j-1) of the largest defect
};

/// Compares V and U column by column on the three-site block the
/// conjugated step can touch. V equals U exactly when omega commutes with U.
inline CommutationReport commutation_defect(const RuleTable& table, const SiteUnitary& u, OmegaVariant variant)
{
    using Block = std::tuple<LabelId, Symbol, Symbol, Symbol>; // label, s_{j+1}, s_j, s_{j-1}
    const auto d = alphabet_size(table.mode());
    const auto ud = u.dagger();
    CommutationReport report;

    auto u_column = [&](const SiteUnitary& m, Symbol s) {
        std::vector<std::pair<Symbol, Complex>> out;
        for (std::size_t r = 0; r < d; ++r)
            if (auto v = m(r, index(s)); v != Complex{})
                out.emplace_back(symbol_at(r), v);
        return out;
    };

    for (std::size_t l = 0; l < table.label_count(); ++l)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                for (std::size_t c = 0; c < d; ++c) {
                    const auto label = static_cast<LabelId>(l);
                    const Symbol sa = symbol_at(a), sb = symbol_at(b), sc = symbol_at(c);
                    std::map<Block, Complex> col_u, col_v;
                    if (const auto* outs = table.find(RuleInput{label, sb, sc}))
                        for (const auto& o : *outs)
                            col_u[{o.label, sa, o.cur, o.prev}] += o.amp;

                    for (const auto& [rb, vb] : u_column(ud, sb))
                        for (const auto& [rc, vc] : u_column(ud, sc)) {
                            const auto* outs = table.find(RuleInput{label, rb, rc});
                            if (!outs)
                                continue;
                            for (const auto& o : *outs) {
                                const Complex base = vb * vc * o.amp;
                                for (const auto& [xa, va] : u_column(u, sa))
                                    for (const auto& [xb, vb2] : u_column(u, o.cur)) {
                                        if (variant == OmegaVariant::Local) {
                                            col_v[{o.label, xa, xb, o.prev}] += base * va * vb2;
                                        } else {
                                            for (const auto& [xc, vc2] : u_column(u, o.prev))
                                                col_v[{o.label, xa, xb, xc}] += base * va * vb2 * vc2;
                                        }
                                    }
                            }
                        }

                    for (const auto& [k, v] : col_u)
                        col_v[k] -= v;
                    for (const auto& [k, diff] : col_v) {
                        if (std::abs(diff) > report.max_defect) {
                            report.max_defect = std::abs(diff);
                            report.witness = "(" + table.label_name(label) + ", " + to_char(sa) + ", " + to_char(sb) +
                                             ", " + to_char(sc) + ")";
                        }
                    }
                }
    return report;
}

// ---------------------------------------------------------------------------
// Validity transport

struct VerdictDiscrepancy {
    std::string sentence;
    TruthStatus standard = TruthStatus::NoDomainYet;
    TruthStatus observer = TruthStatus::NoDomainYet;
};

struct TransportReport {
    OmegaVariant variant = OmegaVariant::Cumulative;
    MachineReport standard;
    MachineReport observer;
    bool verdicts_agree = true;
    std::vector<VerdictDiscrepancy> discrepancies;
};

/// Observer-frame term views: V^n omega|init> with u^dagger undone on the
/// frozen sites, which is where every observer projector Q^{M,O} acts.
inline std::vector<TermView> observer_term_views(const WideState& w, const RuleTable& table, const SiteUnitary& u)
{
    const std::size_t frozen = w.head() - 2;
    auto frame = frozen >= 1 ? apply_sites(w, u.dagger(), 1, frozen) : w;
    std::vector<TermView> out;
    for (const auto& [k, amp] : frame.terms())
        out.push_back(TermView{table.label_name(k.label) + ":" + render(k.tape), k.tape, frame.head(), std::norm(amp)});
    return out;
}

inline TransportReport validity_transport_check(const RuleTable& table, const SiteUnitary& u, OmegaVariant variant,
                                                std::size_t n, std::size_t max_len,
                                                Semantics semantics = Semantics::PathLocal)
{
    TransportReport r;
    r.variant = variant;
    r.standard = machine_report(table, n, max_len, semantics);
    TransformedDynamics dyn(table, u, variant);
    auto views = observer_term_views(dyn.evolve(n), table, u);
    r.observer = machine_report(views, table.mode(), n, max_len, semantics);

    std::set<std::string> sentences;
    for (const auto* rep : {&r.standard, &r.observer})
        for (const auto& e : rep->entries)
            if (e.within_bound)
                sentences.insert(e.sentence.text());
    for (const auto& s : sentences) {
        auto a = r.standard.status_of(s), b = r.observer.status_of(s);
        if (a != b)
            r.discrepancies.push_back(VerdictDiscrepancy{s, a, b});
    }
    r.verdicts_agree = r.discrepancies.empty() && r.standard.valid_so_far == r.observer.valid_so_far &&
                       r.standard.consistent_so_far == r.observer.consistent_so_far;
    return r;
}

} // namespace qsm
