#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace annuli::hier {

using Rational = boost::multiprecision::cpp_rational;

// exact element of Q(i)
struct QI {
    Rational re{0}, im{0};

    QI() = default;
    QI(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}
    QI(long long r) : re(r) {}

    bool is_zero() const { return re == 0 && im == 0; }
    std::complex<double> to_complex() const;
    std::string str() const;

    friend QI operator+(const QI& a, const QI& b) { return {a.re + b.re, a.im + b.im}; }
    friend QI operator-(const QI& a, const QI& b) { return {a.re - b.re, a.im - b.im}; }
    friend QI operator-(const QI& a) { return {-a.re, -a.im}; }
    friend QI operator*(const QI& a, const QI& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend QI operator/(const QI& a, const QI& b);
    friend bool operator==(const QI& a, const QI& b) { return a.re == b.re && a.im == b.im; }
};

inline const QI iunit{0, 1};

// Pure derivative symbol: k > 0 is d_z^k omega, k < 0 is d_zbar^{|k|} omega.
using Deriv = int;

struct TermKey {
    int gpow = 0;              // power of gamma, gamma-bar = gamma^-1
    int ew = 0;                // e^{ew * omega}
    std::vector<Deriv> mono;   // sorted ascending

    auto operator<=>(const TermKey&) const = default;
};

// Differential polynomial in normal form: no mixed derivatives.
class DiffPoly {
public:
    DiffPoly() = default;
    static DiffPoly constant(const QI& c);
    static DiffPoly deriv(Deriv k, const QI& c = QI(1));
    static DiffPoly exp_omega(int m, const QI& c = QI(1));
    static DiffPoly gamma(int p, const QI& c = QI(1));

    const std::map<TermKey, QI>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    void add(const TermKey& k, const QI& c);

    DiffPoly& operator+=(const DiffPoly& o);
    DiffPoly& operator-=(const DiffPoly& o);
    friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
    friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }
    friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b);
    friend DiffPoly operator*(const QI& s, const DiffPoly& a);
    friend bool operator==(const DiffPoly& a, const DiffPoly& b) { return a.terms_ == b.terms_; }

    // weight = #d_z - #d_zbar; nullopt if terms disagree
    std::optional<int> weight() const;
    // separate terms by gamma power
    std::map<int, DiffPoly> by_gamma() const;
    std::string str() const;

private:
    std::map<TermKey, QI> terms_;
};

// (e^{-2w} - e^{2w})/16, the value of omega_{z zbar}
DiffPoly mixed_rule();

DiffPoly d_z(const DiffPoly& p);
DiffPoly d_zbar(const DiffPoly& p);

// 4 u_{z zbar} + u (e^{2w} + e^{-2w})/2
DiffPoly linearized_residual(const DiffPoly& u);

// solves phi_z = 4 w_z u_z, phi_zbar = -u sinh w cosh w with zero constant
DiffPoly solve_phi(const DiffPoly& u);

struct HierarchyLevel {
    int n = 0;
    DiffPoly u;
    DiffPoly sigma;
    DiffPoly tau;   // tau_{n-1}, the one used to produce u_n
    DiffPoly phi;   // phi_{n-1}
    QI c;           // constant used at this step
};

HierarchyLevel initial_level();
// Lax-form step: tau_n = 2i gbar (phi_n/2 - u_{n;z}) + c_next,
// u_{n+1} = -2i tau_{n;z} - 4i w_z tau_n, sigma_{n+1} = g e^{2w} tau_n + 4i g u_{n+1;zbar}
HierarchyLevel ps_step(const HierarchyLevel& level, const QI& c_next);
std::vector<HierarchyLevel> lax_hierarchy(int levels, const std::vector<QI>& constants = {});

// Monic list u_{n+1} = u_{n;zz} - w_z phi_n, started with phi_0 = -1.
std::vector<DiffPoly> monic_hierarchy(int levels);

// reference monic forms; reference_u3 carries w_zzz w_z^3 and is not weight-homogeneous,
// weighted_u3 is the form the iteration produces
DiffPoly reference_u1();
DiffPoly reference_u2();
DiffPoly reference_u3();
DiffPoly weighted_u3();

struct Jet {
    std::map<Deriv, std::complex<double>> d;
    double omega = 0.0;
    std::complex<double> gamma{1.0, 0.0};
};

// throws std::out_of_range on missing jet entries
std::complex<double> eval_jet(const DiffPoly& p, const Jet& jet);

std::string deriv_name(Deriv k);

}  // namespace annuli::hier
