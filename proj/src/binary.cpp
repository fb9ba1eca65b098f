#include "netpricing/binary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "netpricing/equilibrium.hpp"
#include "netpricing/errors.hpp"
#include "netpricing/rng.hpp"

namespace netpricing {

BinaryPricingProblem::BinaryPricingProblem(ExternalityNetwork network, double regular,
                                           double discounted)
    : net(std::move(network)), p_reg(regular), p_dsc(discounted) {
    if (!(p_reg > p_dsc)) throw std::invalid_argument("p_reg must exceed p_dsc");
    if (p_dsc < 0.0) throw std::invalid_argument("p_dsc must be nonnegative");
    margin_warning = cost_margin() < delta();
}

Eigen::VectorXd BinaryPricingProblem::decode_prices(const Eigen::VectorXi& y) const {
    return delta() * y.cast<double>().array() + p_mid();
}

double BinaryPricingProblem::objective(const Eigen::VectorXi& y) const {
    const Eigen::VectorXd p = decode_prices(y);
    const Investments inv = ne_closed_form(net, p);
    return (p.array() - net.c).matrix().dot(inv.x);
}

double QuadraticForm::value(const Eigen::VectorXi& y) const {
    const Eigen::VectorXd yd = y.cast<double>();
    return yd.dot(Qhat * yd) + 2.0 * d.dot(yd) + z;
}

Eigen::MatrixXd QuadraticForm::homogenized() const {
    const int m = n();
    Eigen::MatrixXd qp = Eigen::MatrixXd::Zero(m + 1, m + 1);
    qp.topLeftCorner(m, m) = Qhat;
    qp.topRightCorner(m, 1) = d;
    qp.bottomLeftCorner(1, m) = d.transpose();
    return qp;
}

double QuadraticForm::guarantee_shift() const {
    return Qhat.cwiseAbs().sum() + 2.0 * d.cwiseAbs().sum() - z;
}

namespace {

Eigen::MatrixXd resolvent(const ExternalityNetwork& net) {
    Eigen::MatrixXd system = net.q_matrix() - net.G;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    if (!(lu.rcond() > 1e-14)) throw SingularSystemError("Q - G is numerically singular");
    return lu.inverse();
}

} // namespace

QuadraticForm reformulate(const BinaryPricingProblem& prob) {
    const Eigen::MatrixXd A = resolvent(prob.net);
    const int n = prob.net.n();
    const double delta = prob.delta();
    const double cm = prob.cost_margin();
    const Eigen::VectorXd as = prob.alpha_shifted();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    QuadraticForm qf;
    qf.Qhat = -delta * delta * sym;
    qf.Qhat.diagonal().setZero();
    qf.d = 0.5 * delta * (A * as - cm * (A.transpose() * ones));
    qf.z = cm * ones.dot(A * as) - delta * delta * A.trace();
    return qf;
}

BruteForceResult brute_force_opt(const BinaryPricingProblem& prob, int max_n) {
    const int n = prob.net.n();
    if (n > max_n)
        throw std::invalid_argument("brute force capped at n = " + std::to_string(max_n) +
                                    "; use the relaxation pipeline instead");
    const Eigen::MatrixXd A = resolvent(prob.net);
    const double delta = prob.delta();
    const double cm = prob.cost_margin();
    const Eigen::VectorXd as = prob.alpha_shifted();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd A_as = A * as;

    BruteForceResult best;
    best.w_opt = -std::numeric_limits<double>::infinity();
    Eigen::VectorXi y(n);
    Eigen::VectorXd yd(n);
    // Ascending k enumerates sign vectors in lexicographic order with
    // -1 < +1 and coordinate 0 most significant, so keeping the first
    // strict maximum realizes the lexicographic tie-break.
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t k = 0; k < total; ++k) {
        for (int i = 0; i < n; ++i) {
            const bool plus = (k >> (n - 1 - i)) & 1ULL;
            y(i) = plus ? 1 : -1;
            yd(i) = plus ? 1.0 : -1.0;
        }
        // (delta y + c' 1)^T A (alpha' - delta y), evaluated directly.
        const Eigen::VectorXd Ay = A * yd;
        const double value = delta * yd.dot(A_as) - delta * delta * yd.dot(Ay) +
                             cm * ones.dot(A_as) - delta * cm * ones.dot(Ay);
        if (value > best.w_opt) {
            best.w_opt = value;
            best.y_star = y;
        }
    }
    return best;
}

SdpSolution solve_sdp_relaxation(const QuadraticForm& qf, double tol, std::uint64_t seed) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const int n1 = qf.n() + 1;
    const Eigen::MatrixXd Qp = qf.homogenized();

    // Rank above the sqrt(2 m) exactness threshold for the unit-diagonal SDP;
    // full rank for small instances costs nothing.
    const int rank =
        n1 <= 64 ? n1 : std::min(n1, static_cast<int>(std::ceil(std::sqrt(2.0 * n1))) + 4);
    constexpr int kMaxSweeps = 2000;
    constexpr int kRestarts = 3;

    Eigen::MatrixXd best_v;
    double best_obj = -std::numeric_limits<double>::infinity();
    double best_change = 0.0;
    int best_sweeps = 0;
    bool converged_any = false;

    for (int restart = 0; restart < kRestarts; ++restart) {
        Rng rng(derive_seed(seed, 0x5d9, static_cast<std::uint64_t>(restart)));
        Eigen::MatrixXd v(rank, n1);
        for (int j = 0; j < n1; ++j) {
            for (int i = 0; i < rank; ++i) v(i, j) = rng.normal();
            v.col(j).normalize();
        }

        double obj = ((v.transpose() * v).cwiseProduct(Qp)).sum();
        double change = std::numeric_limits<double>::infinity();
        int sweep = 0;
        for (; sweep < kMaxSweeps; ++sweep) {
            for (int i = 0; i < n1; ++i) {
                Eigen::VectorXd g = v * Qp.col(i);  // Q'_ii = 0, no self term
                const double norm = g.norm();
                if (norm > 1e-300) v.col(i) = g / norm;
            }
            const double next = ((v.transpose() * v).cwiseProduct(Qp)).sum();
            change = std::abs(next - obj);
            obj = next;
            if (change <= tol * (1.0 + std::abs(obj))) break;
        }
        if (sweep < kMaxSweeps) converged_any = true;
        if (obj > best_obj) {
            best_obj = obj;
            best_v = v;
            best_change = change;
            best_sweeps = sweep + 1;
        }
    }
    if (!converged_any)
        throw IterationLimitError("SDP coordinate ascent did not stabilize",
                                  Eigen::VectorXd::Constant(1, best_obj), best_change);

    SdpSolution out;
    out.V = Eigen::MatrixXd::Zero(n1, n1);
    out.V.topRows(best_v.rows()) = best_v;
    out.sdp_objective = best_obj + qf.z;
    out.max_norm_deviation = (out.V.colwise().norm().array() - 1.0).abs().maxCoeff();
    out.last_objective_change = best_change;
    out.sweeps = best_sweeps;
    return out;
}

RoundingResult round_hyperplane(const SdpSolution& sdp, const QuadraticForm& qf, int trials,
                                std::uint64_t rng_seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const int n = qf.n();
    const int dims = static_cast<int>(sdp.V.rows());
    Rng rng(derive_seed(rng_seed, 0x6042));

    RoundingResult out;
    out.w_alg = -std::numeric_limits<double>::infinity();
    double sum = 0.0, sumsq = 0.0;
    Eigen::VectorXd g(dims);
    Eigen::VectorXi y(n);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < dims; ++i) g(i) = rng.normal();
        const Eigen::VectorXd proj = sdp.V.transpose() * g;
        const double flip = proj(n) < 0.0 ? -1.0 : 1.0;  // de-homogenize
        for (int i = 0; i < n; ++i) y(i) = (flip * proj(i) < 0.0) ? -1 : 1;
        const double value = qf.value(y);
        sum += value;
        sumsq += value * value;
        if (value > out.w_alg) {
            out.w_alg = value;
            out.y_best = y;
        }
    }
    out.w_mean = sum / trials;
    if (trials > 1) {
        const double var = std::max(0.0, (sumsq - trials * out.w_mean * out.w_mean) / (trials - 1));
        out.w_stderr = std::sqrt(var / trials);
    }
    return out;
}

double compute_r(const BinaryPricingProblem& prob) {
    const Eigen::MatrixXd A = resolvent(prob.net);
    const int n = prob.net.n();
    const double delta = prob.delta();
    const double cm = prob.cost_margin();
    const Eigen::VectorXd as = prob.alpha_shifted();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    return delta * delta * ones.dot(A * ones) +
           delta * (A * as - cm * (A.transpose() * ones)).cwiseAbs().sum() -
           cm * ones.dot(A * as) - 2.0 * delta * delta * A.trace();
}

BinaryPipelineResult binary_pricing_pipeline(const BinaryPricingProblem& prob, int trials,
                                             std::uint64_t seed, int brute_cap) {
    const QuadraticForm qf = reformulate(prob);
    const SdpSolution sdp = solve_sdp_relaxation(qf, 1e-9, derive_seed(seed, 0xba5e));
    const RoundingResult rounding = round_hyperplane(sdp, qf, trials, derive_seed(seed, 0xf1e));

    BinaryPipelineResult out;
    out.y = rounding.y_best;
    out.w_alg = rounding.w_alg;
    out.w_mean = rounding.w_mean;
    out.w_stderr = rounding.w_stderr;
    out.r_constant = compute_r(prob);
    out.guarantee_shift = qf.guarantee_shift();
    out.outcome.prices = prob.decode_prices(out.y);
    out.outcome.investments = ne_closed_form(prob.net, out.outcome.prices);
    out.outcome.profit =
        (out.outcome.prices.array() - prob.net.c).matrix().dot(out.outcome.investments.x);
    out.outcome.scenario = PricingScenario::Binary;
    if (prob.net.n() <= brute_cap) {
        const BruteForceResult exact = brute_force_opt(prob, brute_cap);
        out.w_opt = exact.w_opt;
        out.achieved_ratio =
            (out.w_alg + out.guarantee_shift) / (exact.w_opt + out.guarantee_shift);
    }
    return out;
}

} // namespace netpricing
