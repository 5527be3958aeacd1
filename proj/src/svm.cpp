#include "pdstate/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pdstate/simd/kernels.hpp"

namespace pdstate::svm {

namespace {

constexpr double kTau = 1e-12;

void check_training_input(const Matrix& x, std::span<const double> y) {
    if (x.rows() != y.size()) throw std::invalid_argument("label count does not match rows");
    if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("empty training matrix");
    bool pos = false, neg = false;
    for (double v : y) {
        if (v == 1.0) pos = true;
        else if (v == -1.0) neg = true;
        else throw std::invalid_argument("labels must be +1 or -1");
    }
    if (!pos || !neg) throw std::invalid_argument("single class: training needs both +1 and -1 labels");
    for (double v : x.data())
        if (!std::isfinite(v)) throw std::invalid_argument("training matrix contains non-finite values");
    bool all_same = true;
    for (std::size_t r = 1; r < x.rows() && all_same; ++r)
        all_same = std::equal(x.row(r).begin(), x.row(r).end(), x.row(0).begin());
    if (all_same) throw std::invalid_argument("degenerate training set: all rows are identical");
}

struct DualSolution {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
    std::vector<double> objective_trace;
};

double dual_objective(std::span<const double> alpha, std::span<const double> grad) {
    double w = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) w += alpha[i] * (1.0 - grad[i]);
    return 0.5 * w;
}

// SMO with second-order working-set selection on
//   min 1/2 a'Qa - e'a   s.t. y'a = 0, 0 <= a <= c,   Q_ij = y_i y_j K_ij.
DualSolution solve_dual(const Matrix& kernel, std::span<const double> y, double c, const SolverOptions& opt) {
    const std::size_t n = y.size();
    DualSolution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto& alpha = sol.alpha;
    const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : std::max<std::size_t>(10'000'000, 100 * n);

    const auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
    const auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

    std::size_t iter = 0;
    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t j = n;
        double best_obj = std::numeric_limits<double>::infinity();
        if (i < n) {
            const double kii = kernel(i, i);
            for (std::size_t t = 0; t < n; ++t) {
                if (!in_low(t)) continue;
                const double v = y[t] * grad[t];
                gmax2 = std::max(gmax2, v);
                const double b = gmax + v;
                if (b <= 0.0) continue;
                double a = kii + kernel(t, t) - 2.0 * kernel(i, t);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if (i == n || j == n || gmax + gmax2 < opt.tolerance) break;
        if (iter >= max_iter) {
            sol.converged = false;
            break;
        }
        ++iter;

        const double old_ai = alpha[i], old_aj = alpha[j];
        const double kij = kernel(i, j);
        if (y[i] != y[j]) {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = (alpha[i] - old_ai) * y[i];
        const double daj = (alpha[j] - old_aj) * y[j];
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (kernel(t, i) * dai + kernel(t, j) * daj);

        if (opt.record_objective && iter % n == 0) sol.objective_trace.push_back(dual_objective(alpha, grad));
    }
    if (opt.record_objective) sol.objective_trace.push_back(dual_objective(alpha, grad));
    sol.iterations = iter;

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    sol.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
    return sol;
}

Matrix kernel_matrix(const Matrix& x, const KernelSpec& kernel) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) k(i, j) = k(j, i) = kernel(x.row(i), x.row(j));
    return k;
}

}  // namespace

std::string to_string(KernelKind k) { return k == KernelKind::Linear ? "linear" : "rbf"; }

KernelKind parse_kernel(const std::string& text) {
    if (text == "linear") return KernelKind::Linear;
    if (text == "rbf") return KernelKind::Rbf;
    throw std::invalid_argument("unknown kernel '" + text + "'");
}

void KernelSpec::validate() const {
    if (kind == KernelKind::Rbf && !(gamma > 0.0)) throw std::invalid_argument("RBF kernel needs gamma > 0");
}

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == KernelKind::Linear) return simd::dot(a, b);
    return std::exp(-gamma * simd::squared_distance(a, b));
}

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols(), 0.0);
    s.scale.assign(x.cols(), 1.0);
    if (x.rows() == 0) return s;
    const auto n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
        m /= n;
        double v = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) v += (x(r, c) - m) * (x(r, c) - m);
        const double sd = std::sqrt(v / n);
        s.mean[c] = m;
        s.scale[c] = sd > 1e-12 * std::max(1.0, std::fabs(m)) ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) throw std::invalid_argument("standardizer width mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) / scale[c];
    return out;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    if (row.size() != mean.size()) throw std::invalid_argument("standardizer width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / scale[c];
    return out;
}

double TrainedSvm::decision(std::span<const double> x) const {
    if (x.size() != support_vectors.cols()) throw std::invalid_argument("decision input has wrong number of columns");
    double f = bias;
    for (std::size_t i = 0; i < dual_coef.size(); ++i) f += dual_coef[i] * kernel(support_vectors.row(i), x);
    return f;
}

std::vector<double> TrainedSvm::decision_values(const Matrix& x) const {
    if (x.cols() != support_vectors.cols())
        throw std::invalid_argument("column mismatch: model expects " + std::to_string(support_vectors.cols()) +
                                    " features, got " + std::to_string(x.cols()));
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = decision(x.row(r));
    return out;
}

std::vector<double> TrainedSvm::linear_weights() const {
    if (kernel.kind != KernelKind::Linear) throw std::logic_error("primal weights exist only for the linear kernel");
    std::vector<double> w(support_vectors.cols(), 0.0);
    for (std::size_t i = 0; i < dual_coef.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += dual_coef[i] * support_vectors(i, j);
    return w;
}

double TrainedSvm::margin_objective() const {
    double sum_alpha = 0.0, quad = 0.0;
    for (std::size_t a = 0; a < dual_coef.size(); ++a) {
        sum_alpha += std::fabs(dual_coef[a]);
        for (std::size_t b = 0; b < dual_coef.size(); ++b)
            quad += dual_coef[a] * dual_coef[b] * kernel(support_vectors.row(a), support_vectors.row(b));
    }
    return sum_alpha - 0.5 * quad;
}

TrainedSvm train(const Matrix& x, std::span<const double> y, const HyperParams& params, const SolverOptions& options) {
    params.kernel.validate();
    if (!(params.c > 0.0)) throw std::invalid_argument("cost parameter c must be positive");
    check_training_input(x, y);

    // The solver always runs with the first label at +1; the other orientation
    // is recovered by negation, so (x, -y) yields exactly the negated model.
    const bool flip = y[0] < 0.0;
    std::vector<double> yy(y.begin(), y.end());
    if (flip)
        for (double& v : yy) v = -v;

    const Matrix k = kernel_matrix(x, params.kernel);
    DualSolution sol = solve_dual(k, yy, params.c, options);

    TrainedSvm m;
    m.kernel = params.kernel;
    m.c = params.c;
    m.alpha = sol.alpha;
    m.iterations = sol.iterations;
    m.converged = sol.converged;
    m.objective_trace = std::move(sol.objective_trace);
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        if (sol.alpha[i] > 0.0) {
            m.support_indices.push_back(i);
            m.support_vectors.append_row(x.row(i));
            m.dual_coef.push_back(sol.alpha[i] * y[i]);
        }
    }
    if (m.support_vectors.cols() == 0) m.support_vectors = Matrix(0, x.cols());
    m.bias = flip ? sol.rho : -sol.rho;
    return m;
}

std::vector<HyperParams> default_grid() {
    std::vector<HyperParams> grid;
    for (int ce = -2; ce <= 2; ++ce) grid.push_back({{KernelKind::Linear, 0.0}, std::ldexp(1.0, ce)});
    for (int ce = -2; ce <= 2; ++ce)
        for (int ge = -4; ge <= 4; ++ge) grid.push_back({{KernelKind::Rbf, std::ldexp(1.0, ge)}, std::ldexp(1.0, ce)});
    return grid;
}

std::vector<std::size_t> stratified_folds(std::span<const double> y, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(i);
    if (pos.size() < folds || neg.size() < folds)
        throw std::invalid_argument("infeasible stratification: each class needs at least " + std::to_string(folds) +
                                    " rows");
    // splitmix64: portable, unlike the standard distributions.
    std::uint64_t state = seed;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::vector<std::size_t> fold_of(y.size());
    std::size_t counter = 0;
    for (auto* group : {&pos, &neg}) {
        auto& g = *group;
        for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[next() % i]);
        for (std::size_t idx : g) fold_of[idx] = counter++ % folds;
    }
    return fold_of;
}

double cv_accuracy(const Matrix& x, std::span<const double> y, const HyperParams& params,
                   std::span<const std::size_t> fold_of, std::size_t folds) {
    std::size_t correct = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? te : tr).push_back(i);
        if (te.empty()) continue;
        std::vector<double> ytr;
        for (std::size_t i : tr) ytr.push_back(y[i]);
        const TrainedSvm m = train(x.select_rows(tr), ytr, params);
        for (std::size_t i : te)
            if (predict_sign(m.decision(x.row(i))) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

namespace {

// Simplicity order used for ties: linear < rbf, then c, then gamma.
bool simpler(const HyperParams& a, const HyperParams& b) {
    if (a.kernel.kind != b.kernel.kind) return a.kernel.kind == KernelKind::Linear;
    if (a.c != b.c) return a.c < b.c;
    return a.kernel.gamma < b.kernel.gamma;
}

}  // namespace

GridSearchResult grid_search(const Matrix& x, std::span<const double> y, std::size_t folds, std::uint64_t seed,
                             const std::vector<HyperParams>& grid) {
    if (grid.empty()) throw std::invalid_argument("empty hyperparameter grid");
    const auto fold_of = stratified_folds(y, folds, seed);
    GridSearchResult res;
    for (const auto& p : grid) res.entries.push_back({p, cv_accuracy(x, y, p, fold_of, folds)});
    const GridEntry* best = &res.entries.front();
    for (const auto& e : res.entries)
        if (e.cv_accuracy > best->cv_accuracy || (e.cv_accuracy == best->cv_accuracy && simpler(e.params, best->params)))
            best = &e;
    res.best = best->params;
    res.best_accuracy = best->cv_accuracy;
    return res;
}

std::vector<double> feature_scores(const TrainedSvm& model) {
    const std::size_t d = model.support_vectors.cols();
    std::vector<double> scores(d, 0.0);
    if (model.kernel.kind == KernelKind::Linear) {
        const auto w = model.linear_weights();
        for (std::size_t j = 0; j < d; ++j) scores[j] = std::fabs(w[j]);
        return scores;
    }
    // Removing feature j multiplies each RBF entry by exp(gamma (a_j - b_j)^2),
    // so the reduced ||w||^2 needs no kernel recomputation.
    const std::size_t n = model.dual_coef.size();
    const auto& sv = model.support_vectors;
    const double g = model.kernel.gamma;
    std::vector<double> reduced(d, 0.0);
    double full = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            const double weight = (a == b ? 1.0 : 2.0) * model.dual_coef[a] * model.dual_coef[b];
            const double kab = model.kernel(sv.row(a), sv.row(b));
            full += weight * kab;
            if (a == b) {
                for (std::size_t j = 0; j < d; ++j) reduced[j] += weight * kab;
                continue;
            }
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = sv(a, j) - sv(b, j);
                reduced[j] += weight * kab * std::exp(g * diff * diff);
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) scores[j] = std::fabs(0.5 * (full - reduced[j]));
    return scores;
}

RfeResult rfe(const Matrix& x, std::span<const double> y, const HyperParams& params, std::size_t folds,
              std::uint64_t seed) {
    if (x.cols() == 0) throw std::invalid_argument("RFE needs at least one feature");
    const auto fold_of = stratified_folds(y, folds, seed);
    std::vector<std::size_t> current(x.cols());
    std::iota(current.begin(), current.end(), 0);

    RfeResult res;
    double best_acc = -1.0;
    while (!current.empty()) {
        const Matrix sub = x.select_cols(current);
        const double acc = cv_accuracy(sub, y, params, fold_of, folds);
        res.accuracy_trace.push_back(acc);
        TrainedSvm model = train(sub, y, params);
        if (acc >= best_acc) {
            best_acc = acc;
            res.subset = current;
            res.model = model;
        }
        if (current.size() == 1) break;
        const auto scores = feature_scores(model);
        const auto drop = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
        res.elimination_order.push_back(current[drop]);
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    return res;
}

GridSearchResult select_model(const Matrix& x, std::span<const double> y, std::size_t folds, std::uint64_t seed) {
    GridSearchResult res = grid_search(x, y, folds, seed);
    RfeResult r = rfe(x, y, res.best, folds, seed);
    res.selected_features = r.subset;
    res.rfe_trace = r.accuracy_trace;
    return res;
}

}  // namespace pdstate::svm
