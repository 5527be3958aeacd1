#include "pdstate/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pdstate::calibrate {

namespace {

// log(1 + exp(x)) without overflow.
double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// 1 / (1 + exp(f)) without overflow.
double inv_one_plus_exp(double f) {
    if (f >= 0.0) {
        const double e = std::exp(-f);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(f));
}

struct Targets {
    double hi = 0.0, lo = 0.0;
};

Targets platt_targets(std::span<const double> labels) {
    double pos = 0.0, neg = 0.0;
    for (double y : labels) (y > 0.0 ? pos : neg) += 1.0;
    if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("Platt fit needs both classes");
    return {(pos + 1.0) / (pos + 2.0), 1.0 / (neg + 2.0)};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CvDecisions cv_decision_values(const Matrix& x, std::span<const double> y, std::span<const Activity> activities,
                               const svm::HyperParams& params, std::uint64_t seed) {
    if (x.rows() != y.size() || activities.size() != y.size())
        throw std::invalid_argument("rows, labels and activities must align");
    CvDecisions out;
    out.values.assign(y.size(), 0.0);

    std::map<Activity, std::pair<bool, bool>> classes;  // activity -> (has OFF, has ON)
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& c = classes[activities[i]];
        (y[i] > 0.0 ? c.first : c.second) = true;
    }
    bool by_activity = classes.size() == 4;
    if (!by_activity) {
        out.warnings.push_back("expected 4 training activities, found " + std::to_string(classes.size()) +
                               "; using stratified 4-fold CV");
    } else {
        for (const auto& [act, c] : classes) {
            if (!c.first || !c.second) {
                by_activity = false;
                out.warnings.push_back("activity '" + std::string(to_string(act)) +
                                       "' lacks one class; using stratified 4-fold CV");
                break;
            }
        }
    }
    out.activity_folds = by_activity;

    std::vector<std::size_t> fold_of(y.size());
    std::size_t folds = 4;
    if (by_activity) {
        std::map<Activity, std::size_t> index;
        for (const auto& [act, c] : classes) index.emplace(act, index.size());
        for (std::size_t i = 0; i < y.size(); ++i) fold_of[i] = index.at(activities[i]);
    } else {
        fold_of = svm::stratified_folds(y, folds, seed);
    }

    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? te : tr).push_back(i);
        if (te.empty()) continue;
        std::vector<double> ytr;
        for (std::size_t i : tr) ytr.push_back(y[i]);
        const auto model = svm::train(x.select_rows(tr), ytr, params);
        for (std::size_t i : te) out.values[i] = model.decision(x.row(i));
    }
    return out;
}

double platt_nll(const PlattParams& p, std::span<const double> decisions, std::span<const double> labels) {
    const Targets t = platt_targets(labels);
    double nll = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const double target = labels[i] > 0.0 ? t.hi : t.lo;
        const double f = p.a * decisions[i] + p.b;
        nll += log1p_exp(f) - (1.0 - target) * f;
    }
    return nll;
}

PlattFit platt_fit(std::span<const double> decisions, std::span<const double> labels) {
    if (decisions.size() != labels.size() || decisions.empty())
        throw std::invalid_argument("decision values and labels must be non-empty and aligned");
    const Targets t = platt_targets(labels);
    double pos = 0.0, neg = 0.0;
    for (double y : labels) (y > 0.0 ? pos : neg) += 1.0;

    constexpr std::size_t kMaxIter = 200;
    constexpr double kGradTol = 1e-8;
    constexpr double kMinStep = 1e-10;
    constexpr double kSigma = 1e-12;
    constexpr double kDecrementTol = 1e-15;

    PlattFit fit;
    PlattParams cur{0.0, std::log((neg + 1.0) / (pos + 1.0))};
    double fval = platt_nll(cur, decisions, labels);
    fit.nll_trace.push_back(fval);

    for (std::size_t it = 0; it < kMaxIter; ++it) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            const double target = labels[i] > 0.0 ? t.hi : t.lo;
            const double p = inv_one_plus_exp(cur.a * decisions[i] + cur.b);
            const double q = 1.0 - p;
            const double d = decisions[i];
            const double w = p * q;
            h11 += d * d * w;
            h22 += w;
            h21 += d * w;
            const double r = target - p;
            g1 += d * r;
            g2 += r;
        }
        if (std::hypot(g1, g2) < kGradTol) {
            fit.converged = true;
            break;
        }
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double slope = g1 * da + g2 * db;
        // Half the Newton decrement bounds the remaining decrease; once it is below
        // the rounding noise of the objective no step can make measurable progress.
        if (-0.5 * slope <= kDecrementTol * std::max(1.0, std::fabs(fval))) {
            fit.converged = true;
            break;
        }

        double step = 1.0;
        bool accepted = false;
        while (step >= kMinStep) {
            const PlattParams next{cur.a + step * da, cur.b + step * db};
            const double nf = platt_nll(next, decisions, labels);
            if (nf < fval + 1e-4 * step * slope) {
                cur = next;
                fval = nf;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        ++fit.iterations;
        if (!accepted) break;  // no further decrease is representable
        fit.nll_trace.push_back(fval);
    }
    fit.params = cur;
    return fit;
}

double posterior_off(double decision, const PlattParams& p) { return inv_one_plus_exp(p.a * decision + p.b); }

double certainty(double m, const PlattParams& p) {
    const double f = p.a * m + p.b;
    if (m >= 0.0) return inv_one_plus_exp(f);
    return inv_one_plus_exp(-f);  // e^f / (1 + e^f)
}

std::vector<double> threshold_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 8; ++i) g.push_back(static_cast<double>(50 + 5 * i) / 100.0);
    return g;
}

double rejection_rate(std::span<const double> certainties, double threshold) {
    if (certainties.empty()) return 0.0;
    std::size_t below = 0;
    for (double p : certainties) below += p < threshold;
    return static_cast<double>(below) / static_cast<double>(certainties.size());
}

double select_threshold(std::span<const double> certainties) {
    if (certainties.empty()) throw std::invalid_argument("threshold selection needs certainty values");
    double chosen = 0.50;
    for (double th : threshold_grid()) {
        std::size_t below = 0;
        for (double p : certainties) below += p < th;
        if (100 * below <= certainties.size()) chosen = th;  // at most 1% rejected
    }
    return chosen;
}

std::string sigmoid_curve_csv(const PlattParams& p, double lo, double hi, std::size_t points) {
    std::ostringstream os;
    os << "decision,p_off\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double d = points > 1 ? lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1) : lo;
        os << fmt(d) << ',' << fmt(posterior_off(d, p)) << '\n';
    }
    return os.str();
}

std::string rejection_table_csv(std::span<const double> decisions, std::span<const double> labels,
                                const PlattParams& p) {
    std::ostringstream os;
    os << "threshold,rejection_rate,accuracy\n";
    for (double th : threshold_grid()) {
        std::size_t kept = 0, correct = 0;
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            if (certainty(decisions[i], p) < th) continue;
            ++kept;
            const double predicted = decisions[i] > 0.0 ? 1.0 : -1.0;
            correct += predicted == labels[i];
        }
        const double rejected = decisions.empty() ? 0.0 : 1.0 - static_cast<double>(kept) / static_cast<double>(decisions.size());
        const double acc = kept ? static_cast<double>(correct) / static_cast<double>(kept) : 0.0;
        os << fmt(th) << ',' << fmt(rejected) << ',' << fmt(acc) << '\n';
    }
    return os.str();
}

}  // namespace pdstate::calibrate
