#include "irt/calibration.hpp"

#include "irt/errors.hpp"
#include "irt/parallel.hpp"
#include "irt/special.hpp"
#include "irt/three_pl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace irt {

namespace {

double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

// log P and log(1-P) for a 3PL item, stable at extreme exponents.
// 1 - P = (1 - c) * sigmoid(-x) exactly, so the miss branch never cancels.
void log_probs(double x, double c, double& log_p, double& log_q) {
    log_q = std::log1p(-c) + log_sigmoid(-x);
    if (c == 0.0) {
        log_p = log_sigmoid(x);
    } else {
        log_p = std::log(c + (1.0 - c) * stable_sigmoid(x));
    }
}

// Correct-response index lists, respondent-major and item-major (CSR both ways).
struct CorrectLists {
    std::vector<std::size_t> offsets; // n + 1
    std::vector<std::size_t> items;
    std::vector<std::size_t> item_offsets; // k + 1
    std::vector<std::size_t> respondents;  // ascending per item
};

CorrectLists build_correct_lists(const ResponseMatrix& matrix) {
    const std::size_t n = matrix.n_respondents();
    const std::size_t k = matrix.n_items();
    CorrectLists lists;
    lists.offsets.resize(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto row = matrix.row(j);
        lists.offsets[j + 1] = lists.offsets[j] +
            static_cast<std::size_t>(std::count(row.begin(), row.end(), std::uint8_t{1}));
    }
    lists.items.resize(lists.offsets[n]);
    for (std::size_t j = 0; j < n; ++j) {
        const auto row = matrix.row(j);
        std::size_t pos = lists.offsets[j];
        for (std::size_t i = 0; i < k; ++i) {
            if (row[i]) lists.items[pos++] = i;
        }
    }
    lists.item_offsets.assign(k + 1, 0);
    for (std::size_t idx : lists.items) ++lists.item_offsets[idx + 1];
    for (std::size_t i = 0; i < k; ++i) lists.item_offsets[i + 1] += lists.item_offsets[i];
    lists.respondents.resize(lists.items.size());
    std::vector<std::size_t> cursor(lists.item_offsets.begin(), lists.item_offsets.end() - 1);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = lists.offsets[j]; p < lists.offsets[j + 1]; ++p) {
            lists.respondents[cursor[lists.items[p]]++] = j;
        }
    }
    return lists;
}

struct EStepWorkspace {
    std::vector<double> log_p;    // K x Q
    std::vector<double> log_q;    // K x Q
    std::vector<double> delta;    // K x Q: log_p - log_q
    std::vector<double> col_base; // Q: sum_i log_q
};

void fill_workspace(std::span<const ItemParameters> items, const QuadratureGrid& grid,
                    EStepWorkspace& ws) {
    const std::size_t k = items.size();
    const std::size_t nq = grid.nodes.size();
    ws.log_p.assign(k * nq, 0.0);
    ws.log_q.assign(k * nq, 0.0);
    ws.delta.assign(k * nq, 0.0);
    ws.col_base.assign(nq, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& item = items[i];
        for (std::size_t q = 0; q < nq; ++q) {
            double lp, lq;
            log_probs(item.a * (grid.nodes[q] - item.b), item.c, lp, lq);
            ws.log_p[i * nq + q] = lp;
            ws.log_q[i * nq + q] = lq;
            ws.delta[i * nq + q] = lp - lq;
        }
    }
    for (std::size_t q = 0; q < nq; ++q) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += ws.log_q[i * nq + q];
        ws.col_base[q] = sum;
    }
}

EStepResult e_step_impl(const ResponseMatrix& matrix, std::span<const ItemParameters> items,
                        const QuadratureGrid& grid, const CorrectLists& lists) {
    const std::size_t n = matrix.n_respondents();
    const std::size_t k = items.size();
    const std::size_t nq = grid.nodes.size();

    EStepWorkspace ws;
    fill_workspace(items, grid, ws);

    EStepResult result;
    result.posterior.assign(n * nq, 0.0);
    result.expected_n.assign(nq, 0.0);
    result.expected_correct.assign(k * nq, 0.0);
    std::vector<double> per_respondent_ll(n, 0.0);

    const int threads = thread_count();

    // Posterior rows are independent per respondent.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t sj = 0; sj < static_cast<std::ptrdiff_t>(n); ++sj) {
        const std::size_t j = static_cast<std::size_t>(sj);
        double* row = result.posterior.data() + j * nq;
        for (std::size_t q = 0; q < nq; ++q) {
            double s = ws.col_base[q];
            for (std::size_t p = lists.offsets[j]; p < lists.offsets[j + 1]; ++p) {
                s += ws.delta[lists.items[p] * nq + q];
            }
            row[q] = s + grid.log_weights[q];
        }
        double max_log = -std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < nq; ++q) max_log = std::max(max_log, row[q]);
        double norm = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            row[q] = std::exp(row[q] - max_log);
            norm += row[q];
        }
        for (std::size_t q = 0; q < nq; ++q) row[q] /= norm;
        per_respondent_ll[j] = max_log + std::log(norm);
    }

    // Each expected-count cell is accumulated by one thread in respondent
    // order, so results do not depend on the thread count.
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = result.posterior.data() + j * nq;
        for (std::size_t q = 0; q < nq; ++q) result.expected_n[q] += row[q];
    }

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(k); ++si) {
        const std::size_t i = static_cast<std::size_t>(si);
        double* out = result.expected_correct.data() + i * nq;
        for (std::size_t p = lists.item_offsets[i]; p < lists.item_offsets[i + 1]; ++p) {
            const double* row = result.posterior.data() + lists.respondents[p] * nq;
            for (std::size_t q = 0; q < nq; ++q) out[q] += row[q];
        }
    }

    result.log_likelihood =
        std::accumulate(per_respondent_ll.begin(), per_respondent_ll.end(), 0.0);
    return result;
}

// Expected per-item log-likelihood over the grid, in the unconstrained
// coordinates v = (a, b, gamma) with c = c_upper * sigmoid(gamma).
class ItemObjective {
public:
    ItemObjective(std::span<const double> nodes, std::span<const double> expected_n,
                  std::span<const double> expected_correct, double c_upper)
        : nodes_(nodes), n_(expected_n), r_(expected_correct), c_upper_(c_upper) {}

    double c_from_gamma(double gamma) const { return c_upper_ * stable_sigmoid(gamma); }

    double eval(const std::array<double, 3>& v, std::array<double, 3>* grad) const {
        const double a = v[0];
        const double b = v[1];
        const double sg = stable_sigmoid(v[2]);
        const double c = c_upper_ * sg;
        if (std::fabs(a) > 30.0 || std::fabs(b) > 30.0 || std::fabs(v[2]) > 40.0) {
            return -std::numeric_limits<double>::infinity();
        }
        double g = 0.0;
        double ga = 0.0, gb = 0.0, gc = 0.0;
        for (std::size_t q = 0; q < nodes_.size(); ++q) {
            const double x = a * (nodes_[q] - b);
            const double s = stable_sigmoid(x);
            double lp, lq;
            log_probs(x, c, lp, lq);
            g += r_[q] * lp + (n_[q] - r_[q]) * lq;
            if (grad) {
                const double p = c + (1.0 - c) * s;
                const double pq = std::max(p * (1.0 - p), 1e-300);
                const double w = (r_[q] - n_[q] * p) / pq;
                const double ds = (1.0 - c) * s * (1.0 - s);
                ga += w * ds * (nodes_[q] - b);
                gb += w * (-ds * a);
                gc += w * (1.0 - s);
            }
        }
        if (grad) {
            (*grad)[0] = ga;
            (*grad)[1] = gb;
            (*grad)[2] = gc * c_upper_ * sg * (1.0 - sg);
        }
        return g;
    }

private:
    std::span<const double> nodes_;
    std::span<const double> n_;
    std::span<const double> r_;
    double c_upper_;
};

// BFGS ascent with Armijo backtracking. Only improving steps are accepted,
// which is what keeps the outer EM monotone.
std::array<double, 3> bfgs_maximize(const ItemObjective& obj, std::array<double, 3> v) {
    constexpr int kMaxIter = 80;
    constexpr double kGradTol = 1e-7;

    std::array<double, 3> grad{};
    double value = obj.eval(v, &grad);

    // Inverse-Hessian approximation, started at identity.
    std::array<std::array<double, 3>, 3> h{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    for (int iter = 0; iter < kMaxIter; ++iter) {
        const double gnorm = std::max({std::fabs(grad[0]), std::fabs(grad[1]), std::fabs(grad[2])});
        if (gnorm < kGradTol * (1.0 + std::fabs(value))) break;

        std::array<double, 3> dir{};
        for (int r = 0; r < 3; ++r) {
            dir[r] = h[r][0] * grad[0] + h[r][1] * grad[1] + h[r][2] * grad[2];
        }
        double slope = dir[0] * grad[0] + dir[1] * grad[1] + dir[2] * grad[2];
        if (!(slope > 0.0)) {
            h = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
            dir = grad;
            slope = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
            if (!(slope > 0.0)) break;
        }

        double step = 1.0;
        std::array<double, 3> v_new{};
        double value_new = -std::numeric_limits<double>::infinity();
        bool accepted = false;
        while (step > 1e-14) {
            for (int r = 0; r < 3; ++r) v_new[r] = v[r] + step * dir[r];
            value_new = obj.eval(v_new, nullptr);
            if (value_new >= value + 1e-4 * step * slope && std::isfinite(value_new)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no ascent direction left at working precision

        std::array<double, 3> grad_new{};
        obj.eval(v_new, &grad_new);

        const std::array<double, 3> s{v_new[0] - v[0], v_new[1] - v[1], v_new[2] - v[2]};
        const std::array<double, 3> y{grad[0] - grad_new[0], grad[1] - grad_new[1],
                                      grad[2] - grad_new[2]};
        const double sy = s[0] * y[0] + s[1] * y[1] + s[2] * y[2];
        if (sy > 1e-12) {
            // Standard BFGS inverse update (maximization form).
            std::array<double, 3> hy{};
            for (int r = 0; r < 3; ++r) {
                hy[r] = h[r][0] * y[0] + h[r][1] * y[1] + h[r][2] * y[2];
            }
            const double yhy = y[0] * hy[0] + y[1] * hy[1] + y[2] * hy[2];
            const double rho = 1.0 / sy;
            for (int r = 0; r < 3; ++r) {
                for (int c2 = 0; c2 < 3; ++c2) {
                    h[r][c2] += (1.0 + yhy * rho) * rho * s[r] * s[c2] -
                                rho * (hy[r] * s[c2] + s[r] * hy[c2]);
                }
            }
        }

        v = v_new;
        value = value_new;
        grad = grad_new;
    }
    return v;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace

void CalibrationConfig::validate() const {
    if (quadrature_points < 11) throw validation_error("quadrature_points must be >= 11");
    if (!(quad_lo < quad_hi)) throw validation_error("quadrature range must satisfy lo < hi");
    if (max_em_iterations < 1) throw validation_error("max_em_iterations must be >= 1");
    if (!(em_tolerance > 0.0)) throw validation_error("em_tolerance must be > 0");
    if (!(c_upper > 0.0 && c_upper < 1.0)) throw validation_error("c_upper must lie in (0, 1)");
    if (!(theta_min < theta_max)) throw validation_error("ability bounds must satisfy min < max");
}

QuadratureGrid normal_prior_grid(int points, double lo, double hi) {
    if (points < 2 || !(lo < hi)) throw validation_error("invalid quadrature grid");
    QuadratureGrid grid;
    grid.nodes.resize(points);
    grid.weights.resize(points);
    grid.log_weights.resize(points);
    const double step = (hi - lo) / (points - 1);
    double total = 0.0;
    for (int q = 0; q < points; ++q) {
        grid.nodes[q] = lo + step * q;
        grid.weights[q] = normal_pdf(grid.nodes[q]);
        total += grid.weights[q];
    }
    for (int q = 0; q < points; ++q) {
        grid.weights[q] /= total;
        grid.log_weights[q] = std::log(grid.weights[q]);
    }
    return grid;
}

EStepResult e_step(const ResponseMatrix& matrix, std::span<const ItemParameters> items,
                   const QuadratureGrid& grid) {
    if (items.size() != matrix.n_items()) {
        throw validation_error("e_step: item count must match matrix columns");
    }
    const CorrectLists lists = build_correct_lists(matrix);
    return e_step_impl(matrix, items, grid, lists);
}

CalibrationResult calibrate_items(const ResponseMatrix& matrix,
                                  const CalibrationConfig& config) {
    config.validate();
    if (matrix.n_respondents() < 2) {
        throw validation_error("calibration requires at least 2 respondents");
    }
    if (matrix.n_items() < 2) {
        throw validation_error("calibration requires at least 2 items");
    }

    const std::size_t n = matrix.n_respondents();

    // Split out degenerate columns; their likelihood has no interior maximum.
    CalibrationResult result;
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < matrix.n_items(); ++i) {
        long sum = 0;
        for (std::size_t j = 0; j < n; ++j) sum += matrix.at(j, i);
        if (sum == 0 || sum == static_cast<long>(n)) {
            result.excluded_items.push_back({matrix.item_ids()[i], "degenerate column"});
        } else {
            usable.push_back(i);
        }
    }
    if (usable.size() < 2) {
        throw validation_error("fewer than 2 usable items after excluding degenerate columns");
    }

    // The EM runs over id-sorted columns so that permuting the input columns
    // permutes the fitted parameters bit for bit.
    std::sort(usable.begin(), usable.end(), [&](std::size_t x, std::size_t y) {
        return matrix.item_ids()[x] < matrix.item_ids()[y];
    });
    std::vector<double> facility;
    for (std::size_t col : usable) {
        long sum = 0;
        for (std::size_t j = 0; j < n; ++j) sum += matrix.at(j, col);
        facility.push_back(static_cast<double>(sum) / static_cast<double>(n));
    }

    std::vector<std::string> respondent_ids = matrix.respondent_ids();
    std::vector<std::string> item_ids;
    std::vector<std::uint8_t> cells(n * usable.size());
    for (std::size_t i = 0; i < usable.size(); ++i) item_ids.push_back(matrix.item_ids()[usable[i]]);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < usable.size(); ++i) {
            cells[j * usable.size() + i] = static_cast<std::uint8_t>(matrix.at(j, usable[i]));
        }
    }
    const ResponseMatrix work =
        ResponseMatrix::create(std::move(respondent_ids), std::move(item_ids), std::move(cells));

    const std::size_t k = usable.size();
    const QuadratureGrid grid =
        normal_prior_grid(config.quadrature_points, config.quad_lo, config.quad_hi);
    const CorrectLists lists = build_correct_lists(work);

    std::vector<ItemParameters> params(k);
    for (std::size_t i = 0; i < k; ++i) {
        params[i].item_id = work.item_ids()[i];
        params[i].a = 1.0;
        params[i].b = std::clamp(logit(1.0 - facility[i]), -4.0, 4.0);
        params[i].c = std::min(0.1, 0.5 * config.c_upper);
        params[i].converged = false;
    }

    const int threads = thread_count();
    std::vector<double> last_delta(k, std::numeric_limits<double>::infinity());
    bool em_converged = false;

    for (int iter = 1; iter <= config.max_em_iterations; ++iter) {
        const EStepResult es = e_step_impl(work, params, grid, lists);
        result.log_likelihood_trace.push_back(es.log_likelihood);
        result.iterations_used = iter;

        const std::size_t nq = grid.nodes.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(k); ++si) {
            const std::size_t i = static_cast<std::size_t>(si);
            const ItemObjective obj(grid.nodes,
                                    {es.expected_n.data(), nq},
                                    {es.expected_correct.data() + i * nq, nq},
                                    config.c_upper);
            std::array<double, 3> v{params[i].a, params[i].b,
                                    logit(std::clamp(params[i].c / config.c_upper, 1e-12,
                                                     1.0 - 1e-12))};
            const auto v_opt = bfgs_maximize(obj, v);
            const double new_c = obj.c_from_gamma(v_opt[2]);
            last_delta[i] = std::max({std::fabs(v_opt[0] - params[i].a),
                                      std::fabs(v_opt[1] - params[i].b),
                                      std::fabs(new_c - params[i].c)});
            params[i].a = v_opt[0];
            params[i].b = v_opt[1];
            params[i].c = new_c;
        }

        const double max_delta = *std::max_element(last_delta.begin(), last_delta.end());
        if (max_delta < config.em_tolerance) {
            em_converged = true;
            break;
        }
    }

    // Likelihood of the final parameters closes the trace.
    const EStepResult final_es = e_step_impl(work, params, grid, lists);
    result.log_likelihood_trace.push_back(final_es.log_likelihood);
    result.log_likelihood = final_es.log_likelihood;

    for (std::size_t i = 0; i < k; ++i) {
        params[i].converged = em_converged || last_delta[i] < config.em_tolerance;
    }

    // Back to the caller's column order.
    std::vector<std::size_t> emit(k);
    std::iota(emit.begin(), emit.end(), std::size_t{0});
    std::sort(emit.begin(), emit.end(),
              [&](std::size_t x, std::size_t y) { return usable[x] < usable[y]; });
    result.items.reserve(k);
    for (std::size_t pos : emit) result.items.push_back(std::move(params[pos]));
    return result;
}

namespace {

double ability_log_likelihood(double theta, std::span<const int> responses,
                              std::span<const ItemParameters> items) {
    double ll = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        double lp, lq;
        log_probs(items[i].a * (theta - items[i].b), items[i].c, lp, lq);
        ll += responses[i] ? lp : lq;
    }
    return ll;
}

} // namespace

AbilityEstimate estimate_ability(std::span<const int> responses,
                                 std::span<const ItemParameters> items,
                                 double theta_min, double theta_max,
                                 std::string respondent_id) {
    if (items.empty()) throw validation_error("estimate_ability requires at least one item");
    if (responses.size() != items.size()) {
        throw validation_error("estimate_ability: responses and items must have equal length");
    }
    if (!(theta_min < theta_max)) {
        throw validation_error("estimate_ability: bounds must satisfy min < max");
    }
    for (const auto& item : items) validate(item);
    for (int r : responses) {
        if (r != 0 && r != 1) throw validation_error("responses must be 0 or 1");
    }

    const auto ll = [&](double t) { return ability_log_likelihood(t, responses, items); };

    // Coarse scan brackets the global maximum before local refinement; the
    // 3PL likelihood need not be unimodal once c > 0.
    constexpr int kScanPoints = 201;
    const double scan_step = (theta_max - theta_min) / (kScanPoints - 1);
    double best_t = theta_min;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < kScanPoints; ++s) {
        const double t = theta_min + scan_step * s;
        const double v = ll(t);
        if (v > best_ll) {
            best_ll = v;
            best_t = t;
        }
    }

    double lo = std::max(theta_min, best_t - scan_step);
    double hi = std::min(theta_max, best_t + scan_step);

    // Golden-section refinement.
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = ll(x1);
    double f2 = ll(x2);
    while (hi - lo > 1e-7) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = ll(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = ll(x1);
        }
    }

    AbilityEstimate est;
    est.respondent_id = std::move(respondent_id);
    est.theta = std::clamp(0.5 * (lo + hi), theta_min, theta_max);
    est.at_bound = (est.theta - theta_min <= 1e-6) || (theta_max - est.theta <= 1e-6);
    return est;
}

std::vector<AbilityEstimate> estimate_abilities(const ResponseMatrix& matrix,
                                                std::span<const ItemParameters> items,
                                                double theta_min, double theta_max) {
    if (items.empty()) throw validation_error("estimate_abilities requires items");

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < matrix.n_items(); ++i) column[matrix.item_ids()[i]] = i;
    std::vector<std::size_t> item_cols;
    item_cols.reserve(items.size());
    for (const auto& item : items) {
        const auto it = column.find(item.item_id);
        if (it == column.end()) {
            throw validation_error("response matrix has no column for item '" + item.item_id + "'");
        }
        item_cols.push_back(it->second);
    }

    const std::size_t n = matrix.n_respondents();
    std::vector<AbilityEstimate> estimates(n);
    const int threads = thread_count();

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t sj = 0; sj < static_cast<std::ptrdiff_t>(n); ++sj) {
        const std::size_t j = static_cast<std::size_t>(sj);
        std::vector<int> responses(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            responses[i] = matrix.at(j, item_cols[i]);
        }
        estimates[j] = estimate_ability(responses, items, theta_min, theta_max,
                                        matrix.respondent_ids()[j]);
    }
    return estimates;
}

BirnbaumFit birnbaum_fit(const ResponseMatrix& matrix, const CalibrationConfig& config) {
    BirnbaumFit fit;
    fit.calibration = calibrate_items(matrix, config);
    fit.abilities = estimate_abilities(matrix, fit.calibration.items, config.theta_min,
                                       config.theta_max);
    return fit;
}

} // namespace irt
