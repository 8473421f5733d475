#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>

#include "emfg/model.hpp"

namespace emfg {

// (E[θ^β], E[θ], E[θ^{α+β}]) of a stationary-mean law.
struct MomentTriple {
    double m_beta = 0.0;
    double m_one = 0.0;
    double m_ab = 0.0;

    static MomentTriple point_mass(const ModelParams& p, double theta);
    bool valid() const { return m_beta > 0.0 && m_one > 0.0 && m_ab > 0.0; }
};

struct GammaLaw {
    double u = 1.0;  // shape
    double v = 1.0;  // scale
};

enum class EquilibriumKind { MFC, Nash, CceRegular, CceSingular };
enum class Status { Unique, InfinitelyMany, NonExistent, IllPosed, NullOptimal };
enum class CceClass { Regular, Singular };

std::string_view to_string(EquilibriumKind k);
std::string_view to_string(Status s);
std::string_view to_string(CceClass c);

struct EquilibriumReport {
    EquilibriumKind kind = EquilibriumKind::MFC;
    Status status = Status::Unique;
    std::optional<double> barrier;
    std::optional<double> theta;
    std::optional<double> reward;
    ModelParams inputs;
    std::optional<GammaLaw> law;
    std::optional<MomentTriple> moments;

    bool has_solution() const { return status == Status::Unique || status == Status::NullOptimal; }
};

class NoNashEquilibrium : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NoRoot : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coefficient of θ^{α+β} in f; identical to c̃_{α+β}.
double mfc_coefficient(const ModelParams& p);
double mfc_f(const ModelParams& p, double theta);
double mfc_f_prime(const ModelParams& p, double theta);
double lagrange_multiplier(const ModelParams& p, double theta);

EquilibriumReport mfc_solve(const ModelParams& p, double regime_tol = kRegimeTolerance);
EquilibriumReport nash_solve(const ModelParams& p, double regime_tol = kRegimeTolerance);

// 1+σ²/(2δ) − (qδ/α)^{1/(1−α)}(1+(1−α)σ²/(2δ))^{1/(1−α)}; zero on the knife edge.
double knife_edge_residual(double delta, double sigma, double q, double alpha);
inline constexpr double kKnifeEdgeTolerance = 1e-10;

struct CceConstants {
    double c_beta = 0.0;
    double c_one = 0.0;
    double c_ab = 0.0;
    double c_ab_tilde = 0.0;

    double c_class(CceClass c) const { return c == CceClass::Regular ? c_ab : c_ab_tilde; }
};

CceConstants cce_constants(const ModelParams& p);

double reward_deviator(const ModelParams& p, const MomentTriple& m);
double reward_regular(const ModelParams& p, const MomentTriple& m);
double reward_singular(const ModelParams& p, const MomentTriple& m);
double reward_class(const ModelParams& p, const MomentTriple& m, CceClass c);

inline constexpr double kZeroSlackTolerance = 1e-9;

struct CceCheck {
    bool holds = false;
    double slack = 0.0;       // RHS − LHS, reward units
    double normalized = 0.0;  // slack / RHS
    double rhs = 0.0;
};

CceCheck cce_check(const ModelParams& p, const MomentTriple& m, CceClass c);

double gamma_moment(const GammaLaw& law, double k);
MomentTriple gamma_moments_triple(const ModelParams& p, const GammaLaw& law);

struct Outperformance {
    bool holds = false;
    double margin = 0.0;
};

Outperformance outperforms_nash(const ModelParams& p, const GammaLaw& law, CceClass c);

inline constexpr double kAlphaBarLo = 1e-4;
inline constexpr double kAlphaBarHi = 1.0 - 1e-4;
double alpha_bar_solve(double delta, double sigma, double q);

}  // namespace emfg
