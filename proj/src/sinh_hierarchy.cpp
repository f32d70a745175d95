#include "annuli/sinh_hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace annuli::hier {

QI operator/(const QI& a, const QI& b) {
    const Rational den = b.re * b.re + b.im * b.im;
    if (den == 0) throw std::domain_error("QI: division by zero");
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

std::complex<double> QI::to_complex() const {
    return {static_cast<double>(re), static_cast<double>(im)};
}

std::string QI::str() const {
    std::ostringstream os;
    if (im == 0) {
        os << re;
    } else if (re == 0) {
        os << im << "*i";
    } else {
        os << "(" << re << (im > 0 ? "+" : "-") << abs(im) << "*i)";
    }
    return os.str();
}

std::string deriv_name(Deriv k) {
    return "w_" + std::string(std::abs(k), k > 0 ? 'z' : 'b');
}

namespace {

void normalize_mono(std::vector<Deriv>& m) { std::sort(m.begin(), m.end(), std::greater<>()); }

TermKey mul_key(const TermKey& a, const TermKey& b) {
    TermKey k{a.gpow + b.gpow, a.ew + b.ew, a.mono};
    k.mono.insert(k.mono.end(), b.mono.begin(), b.mono.end());
    normalize_mono(k.mono);
    return k;
}

DiffPoly term_poly(const TermKey& k, const QI& c) {
    DiffPoly p;
    p.add(k, c);
    return p;
}

}  // namespace

void DiffPoly::add(const TermKey& k, const QI& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(k, c);
        return;
    }
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
}

DiffPoly DiffPoly::constant(const QI& c) { return term_poly({}, c); }

DiffPoly DiffPoly::deriv(Deriv k, const QI& c) {
    if (k == 0) throw std::invalid_argument("deriv order 0");
    return term_poly({0, 0, {k}}, c);
}

DiffPoly DiffPoly::exp_omega(int m, const QI& c) { return term_poly({0, m, {}}, c); }

DiffPoly DiffPoly::gamma(int p, const QI& c) { return term_poly({p, 0, {}}, c); }

DiffPoly& DiffPoly::operator+=(const DiffPoly& o) {
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
}

DiffPoly& DiffPoly::operator-=(const DiffPoly& o) {
    for (const auto& [k, c] : o.terms_) add(k, -c);
    return *this;
}

DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
    DiffPoly r;
    for (const auto& [ka, ca] : a.terms_)
        for (const auto& [kb, cb] : b.terms_) r.add(mul_key(ka, kb), ca * cb);
    return r;
}

DiffPoly operator*(const QI& s, const DiffPoly& a) {
    DiffPoly r;
    for (const auto& [k, c] : a.terms_) r.add(k, s * c);
    return r;
}

std::optional<int> DiffPoly::weight() const {
    std::optional<int> w;
    for (const auto& [k, c] : terms_) {
        int s = 0;
        for (Deriv d : k.mono) s += d;
        if (w && *w != s) return std::nullopt;
        w = s;
    }
    return w ? w : std::optional<int>(0);
}

std::map<int, DiffPoly> DiffPoly::by_gamma() const {
    std::map<int, DiffPoly> out;
    for (const auto& [k, c] : terms_) out[k.gpow].add(k, c);
    return out;
}

std::string DiffPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [k, c] = *it;
        std::vector<std::string> f;
        if (k.gpow != 0) f.push_back(k.gpow == 1 ? "g" : "g^" + std::to_string(k.gpow));
        if (k.ew != 0) f.push_back("e^{" + std::to_string(k.ew) + "w}");
        for (size_t i = 0; i < k.mono.size();) {
            size_t j = i;
            while (j < k.mono.size() && k.mono[j] == k.mono[i]) ++j;
            std::string s = deriv_name(k.mono[i]);
            if (j - i > 1) s += "^" + std::to_string(j - i);
            f.push_back(s);
            i = j;
        }
        std::string body;
        for (size_t i = 0; i < f.size(); ++i) body += (i ? "*" : "") + f[i];
        QI cc = c;
        bool neg = false;
        if (c.im == 0 && c.re < 0) {
            neg = true;
            cc = -c;
        }
        if (first)
            os << (neg ? "-" : "");
        else
            os << (neg ? " - " : " + ");
        first = false;
        const bool unit = cc.im == 0 && cc.re == 1;
        if (body.empty())
            os << cc.str();
        else if (unit)
            os << body;
        else
            os << cc.str() << "*" << body;
    }
    return os.str();
}

DiffPoly mixed_rule() {
    const QI s(Rational(1, 16));
    return DiffPoly::exp_omega(-2, s) - DiffPoly::exp_omega(2, s);
}

namespace {

// derivative of a single factor; dir = +1 for d_z, -1 for d_zbar
DiffPoly d_factor(Deriv k, int dir) {
    if ((k > 0) == (dir > 0)) return DiffPoly::deriv(k + dir);
    // mixed: d_z d_zbar^{|k|} w = d_zbar^{|k|-1} (rule), and symmetrically
    DiffPoly p = mixed_rule();
    const int n = std::abs(k) - 1;
    for (int i = 0; i < n; ++i) p = (dir > 0) ? d_zbar(p) : d_z(p);
    return p;
}

DiffPoly d_dir(const DiffPoly& p, int dir) {
    DiffPoly r;
    for (const auto& [k, c] : p.terms()) {
        TermKey base{k.gpow, k.ew, {}};
        if (k.ew != 0) {
            TermKey t = k;
            t.mono.push_back(dir);
            normalize_mono(t.mono);
            r.add(t, c * QI(k.ew));
        }
        for (size_t i = 0; i < k.mono.size(); ++i) {
            if (i > 0 && k.mono[i] == k.mono[i - 1]) continue;
            const auto mult = std::count(k.mono.begin(), k.mono.end(), k.mono[i]);
            TermKey rest = base;
            bool removed = false;
            for (size_t j = 0; j < k.mono.size(); ++j) {
                if (!removed && j == i) {
                    removed = true;
                    continue;
                }
                rest.mono.push_back(k.mono[j]);
            }
            normalize_mono(rest.mono);
            r += (c * QI(static_cast<long long>(mult))) * (term_poly(rest, QI(1)) * d_factor(k.mono[i], dir));
        }
    }
    return r;
}

std::vector<std::vector<Deriv>> partitions(int w) {
    std::vector<std::vector<Deriv>> out;
    std::vector<Deriv> cur;
    std::function<void(int, int)> rec = [&](int left, int maxpart) {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int p = std::min(left, maxpart); p >= 1; --p) {
            cur.push_back(p);
            rec(left - p, p);
            cur.pop_back();
        }
    };
    if (w >= 0) rec(w, w);
    return out;
}

// Solves A x = r exactly; returns nullopt if inconsistent. Free variables set to 0.
std::optional<std::vector<QI>> solve_exact(std::vector<std::vector<QI>> A, std::vector<QI> r) {
    const size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    std::vector<int> pivcol;
    size_t row = 0;
    for (size_t col = 0; col < cols && row < rows; ++col) {
        size_t p = row;
        while (p < rows && A[p][col].is_zero()) ++p;
        if (p == rows) continue;
        std::swap(A[p], A[row]);
        std::swap(r[p], r[row]);
        const QI inv = QI(1) / A[row][col];
        for (size_t j = col; j < cols; ++j) A[row][j] = A[row][j] * inv;
        r[row] = r[row] * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == row || A[i][col].is_zero()) continue;
            const QI f = A[i][col];
            for (size_t j = col; j < cols; ++j)
                if (!A[row][j].is_zero()) A[i][j] = A[i][j] - f * A[row][j];
            r[i] = r[i] - f * r[row];
        }
        pivcol.push_back(static_cast<int>(col));
        ++row;
    }
    for (size_t i = row; i < rows; ++i)
        if (!r[i].is_zero()) return std::nullopt;
    std::vector<QI> x(cols);
    for (size_t i = 0; i < pivcol.size(); ++i) x[pivcol[i]] = r[i];
    return x;
}

std::optional<DiffPoly> solve_phi_tier(const DiffPoly& r1, const DiffPoly& r2, int w, int tier) {
    std::vector<TermKey> basis;
    std::vector<int> ews = {0};
    if (tier >= 1) ews = {-4, -2, 0, 2, 4};
    std::vector<std::vector<Deriv>> monos = partitions(w);
    if (tier >= 2)
        for (int j = 1; j <= 2; ++j)
            for (auto m : partitions(w + j)) {
                m.push_back(-j);
                normalize_mono(m);
                monos.push_back(m);
            }
    for (int e : ews)
        for (const auto& m : monos)
            if (!(m.empty() && e == 0)) basis.push_back({0, e, m});

    std::map<TermKey, size_t> row1, row2;
    std::vector<DiffPoly> dz(basis.size()), dzb(basis.size());
    for (size_t j = 0; j < basis.size(); ++j) {
        const DiffPoly b = term_poly(basis[j], QI(1));
        dz[j] = d_z(b);
        dzb[j] = d_zbar(b);
        for (const auto& [k, c] : dz[j].terms()) row1.emplace(k, 0);
        for (const auto& [k, c] : dzb[j].terms()) row2.emplace(k, 0);
    }
    for (const auto& [k, c] : r1.terms()) row1.emplace(k, 0);
    for (const auto& [k, c] : r2.terms()) row2.emplace(k, 0);
    size_t n = 0;
    for (auto& [k, i] : row1) i = n++;
    for (auto& [k, i] : row2) i = n++;
    std::vector<std::vector<QI>> A(n, std::vector<QI>(basis.size()));
    std::vector<QI> rhs(n);
    for (size_t j = 0; j < basis.size(); ++j) {
        for (const auto& [k, c] : dz[j].terms()) A[row1[k]][j] = c;
        for (const auto& [k, c] : dzb[j].terms()) A[row2[k]][j] = c;
    }
    for (const auto& [k, c] : r1.terms()) rhs[row1[k]] = c;
    for (const auto& [k, c] : r2.terms()) rhs[row2[k]] = c;
    auto x = solve_exact(std::move(A), std::move(rhs));
    if (!x) return std::nullopt;
    DiffPoly phi;
    for (size_t j = 0; j < basis.size(); ++j) phi.add(basis[j], (*x)[j]);
    return phi;
}

DiffPoly strip_gamma(const DiffPoly& p) {
    DiffPoly r;
    for (const auto& [k, c] : p.terms()) r.add({0, k.ew, k.mono}, c);
    return r;
}

}  // namespace

DiffPoly d_z(const DiffPoly& p) { return d_dir(p, +1); }
DiffPoly d_zbar(const DiffPoly& p) { return d_dir(p, -1); }

DiffPoly linearized_residual(const DiffPoly& u) {
    const QI half(Rational(1, 2));
    const DiffPoly cosh2 = DiffPoly::exp_omega(2, half) + DiffPoly::exp_omega(-2, half);
    return QI(4) * d_z(d_zbar(u)) + u * cosh2;
}

DiffPoly solve_phi(const DiffPoly& u) {
    if (u.is_zero()) return {};
    const QI q(Rational(1, 4));
    // sinh w cosh w = (e^{2w} - e^{-2w})/4
    const DiffPoly sc = DiffPoly::exp_omega(2, q) - DiffPoly::exp_omega(-2, q);
    DiffPoly phi;
    for (const auto& [gp, part] : u.by_gamma()) {
        const DiffPoly up = strip_gamma(part);
        const DiffPoly r1 = QI(4) * (DiffPoly::deriv(1) * d_z(up));
        const DiffPoly r2 = QI(-1) * (up * sc);
        const auto w = up.weight();
        if (!w) throw std::runtime_error("solve_phi: u is not weight-homogeneous");
        std::optional<DiffPoly> sol;
        for (int tier = 0; tier <= 2 && !sol; ++tier) sol = solve_phi_tier(r1, r2, *w + 1, tier);
        if (!sol) throw std::runtime_error("solve_phi: antiderivative system inconsistent");
        phi += DiffPoly::gamma(gp) * *sol;
    }
    return phi;
}

HierarchyLevel initial_level() { return {}; }

HierarchyLevel ps_step(const HierarchyLevel& level, const QI& c_next) {
    const DiffPoly wz = DiffPoly::deriv(1);
    const DiffPoly phi = solve_phi(level.u);
    const QI half(Rational(1, 2));
    DiffPoly tau = (QI(2) * iunit) * (DiffPoly::gamma(-1) * (half * phi - d_z(level.u)));
    tau += DiffPoly::constant(c_next);
    HierarchyLevel next;
    next.n = level.n + 1;
    next.phi = phi;
    next.tau = tau;
    next.c = c_next;
    next.u = (QI(-2) * iunit) * d_z(tau) - (QI(4) * iunit) * (wz * tau);
    next.sigma = DiffPoly::gamma(1) * DiffPoly::exp_omega(2) * tau +
                 (QI(4) * iunit) * (DiffPoly::gamma(1) * d_zbar(next.u));
    return next;
}

std::vector<HierarchyLevel> lax_hierarchy(int levels, const std::vector<QI>& constants) {
    std::vector<HierarchyLevel> out{initial_level()};
    for (int n = 0; n < levels; ++n) {
        QI c = (n == 0) ? QI(0, Rational(1, 4)) : QI(0);
        if (static_cast<size_t>(n) < constants.size()) c = constants[n];
        out.push_back(ps_step(out.back(), c));
    }
    return out;
}

std::vector<DiffPoly> monic_hierarchy(int levels) {
    std::vector<DiffPoly> u{DiffPoly{}};
    const DiffPoly wz = DiffPoly::deriv(1);
    for (int n = 0; n < levels; ++n) {
        DiffPoly phi = (n == 0) ? DiffPoly::constant(QI(-1)) : solve_phi(u.back());
        u.push_back(d_z(d_z(u.back())) - wz * phi);
    }
    return u;
}

namespace {
DiffPoly mono(std::vector<Deriv> m, long long c) {
    normalize_mono(m);
    return term_poly({0, 0, m}, QI(c));
}
}  // namespace

DiffPoly reference_u1() { return mono({1}, 1); }
DiffPoly reference_u2() { return mono({3}, 1) + mono({1, 1, 1}, -2); }
DiffPoly reference_u3() {
    return mono({5}, 1) + mono({3, 1, 1, 1}, -10) + mono({2, 2, 1}, -10) + mono({1, 1, 1, 1, 1}, 6);
}
DiffPoly weighted_u3() {
    return mono({5}, 1) + mono({3, 1, 1}, -10) + mono({2, 2, 1}, -10) + mono({1, 1, 1, 1, 1}, 6);
}

std::complex<double> eval_jet(const DiffPoly& p, const Jet& jet) {
    std::complex<double> s = 0;
    for (const auto& [k, c] : p.terms()) {
        std::complex<double> t = c.to_complex() * std::pow(jet.gamma, k.gpow) * std::exp(k.ew * jet.omega);
        for (Deriv d : k.mono) {
            auto it = jet.d.find(d);
            if (it == jet.d.end()) throw std::out_of_range("eval_jet: missing " + deriv_name(d));
            t *= it->second;
        }
        s += t;
    }
    return s;
}

}  // namespace annuli::hier
