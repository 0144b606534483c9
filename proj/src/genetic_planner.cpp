#include "searchtrack/control.hpp"

#include "searchtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace searchtrack::control {

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Decoded chromosome. Each agent's gene block is one-hot over 2 |U_j| bits:
// the first |U_j| bits select a search action, the last |U_j| a track action.
// Storing the hot position keeps the one-decision-per-agent constraint by
// construction.
struct Individual {
    std::vector<std::size_t> hot;
    double fitness = kInfeasible;
};

class Genetics {
public:
    explicit Genetics(PlanContext& ctx) : ctx_(ctx) {
        for (std::size_t j = 0; j < ctx.agent_count(); ++j) block_.push_back(2 * ctx.candidates(j).size());
    }

    [[nodiscard]] std::size_t agents() const { return block_.size(); }
    [[nodiscard]] std::size_t block(std::size_t j) const { return block_[j]; }

    [[nodiscard]] Mode mode(std::size_t j, std::size_t hot) const {
        return hot < block_[j] / 2 ? Mode::search : Mode::track;
    }
    [[nodiscard]] std::size_t action(std::size_t j, std::size_t hot) const { return hot % (block_[j] / 2); }

    void decode(const Individual& ind, ModeAssignment& modes, std::vector<std::size_t>& actions) const {
        modes.modes.resize(agents());
        actions.resize(agents());
        for (std::size_t j = 0; j < agents(); ++j) {
            modes.modes[j] = mode(j, ind.hot[j]);
            actions[j] = action(j, ind.hot[j]);
        }
    }

    void evaluate(Individual& ind) {
        decode(ind, modes_, actions_);
        positions_.resize(agents());
        for (std::size_t j = 0; j < agents(); ++j) positions_[j] = ctx_.candidates(j)[actions_[j]].target;
        ind.fitness = ctx_.separated(positions_) ? objective(ctx_, modes_, actions_) : kInfeasible;
    }

    /// Total number of chromosomes, saturating at `cap + 1`.
    [[nodiscard]] std::size_t space_size(std::size_t cap) const {
        std::size_t total = 1;
        for (std::size_t b : block_) {
            if (total > cap / b) return cap + 1;
            total *= b;
        }
        return total;
    }

private:
    PlanContext& ctx_;
    std::vector<std::size_t> block_;
    ModeAssignment modes_;
    std::vector<std::size_t> actions_;
    std::vector<Position> positions_;
};

const Individual& tournament(const std::vector<Individual>& pop, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Individual& a = pop[pick(rng)];
    const Individual& b = pop[pick(rng)];
    return b.fitness < a.fitness ? b : a;
}

std::size_t best_index(const std::vector<Individual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness < pop[best].fitness) best = i;
    return best;
}

PlanResult to_result(PlanContext& ctx, const Genetics& g, const Individual& ind) {
    PlanResult r;
    g.decode(ind, r.modes, r.action_indices);
    std::vector<std::pair<std::size_t, std::size_t>> searching;
    for (std::size_t j = 0; j < g.agents(); ++j) {
        r.actions.push_back(ctx.candidates(j)[r.action_indices[j]]);
        if (r.modes.modes[j] == Mode::search)
            searching.emplace_back(j, r.action_indices[j]);
        else
            r.track_costs[j] = ctx.track_cost(j, r.action_indices[j]);
    }
    r.search_cost = ctx.search_cost(searching);
    return r;
}

}  // namespace

PlanResult plan_ga(PlanContext& ctx, const PlanResult& seed, Rng& rng) {
    const PlanConfig& cfg = ctx.problem().config;
    Genetics g(ctx);
    const std::size_t n = g.agents();
    const auto population = static_cast<std::size_t>(cfg.ga_population);

    std::vector<Individual> pop;
    Individual first;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t half = g.block(j) / 2;
        const std::size_t idx = j < seed.action_indices.size() ? seed.action_indices[j] : 0;
        const bool track = j < seed.modes.modes.size() && seed.modes.modes[j] == Mode::track;
        first.hot.push_back((track ? half : 0) + idx);
    }
    g.evaluate(first);
    pop.push_back(first);

    const std::size_t space = g.space_size(population);
    if (space <= population) {
        // Small problems: the initial population is the whole chromosome space.
        Individual ind;
        ind.hot.assign(n, 0);
        for (std::size_t k = 0; k < space; ++k) {
            if (ind.hot != first.hot) {
                g.evaluate(ind);
                pop.push_back(ind);
            }
            std::size_t j = 0;
            while (j < n && ++ind.hot[j] == g.block(j)) ind.hot[j++] = 0;
        }
    } else {
        std::size_t attempts = 0;
        while (pop.size() < population && attempts < 20 * population) {
            ++attempts;
            Individual ind;
            for (std::size_t j = 0; j < n; ++j)
                ind.hot.push_back(std::uniform_int_distribution<std::size_t>(0, g.block(j) - 1)(rng));
            const bool duplicate =
                std::any_of(pop.begin(), pop.end(), [&](const Individual& o) { return o.hot == ind.hot; });
            if (duplicate) continue;
            g.evaluate(ind);
            pop.push_back(std::move(ind));
        }
    }

    std::size_t max_block = 1;
    for (std::size_t j = 0; j < n; ++j) max_block = std::max(max_block, g.block(j) / 2);
    const double p_mut = n == 0 ? 0.0 : 1.0 / (static_cast<double>(n) * static_cast<double>(max_block));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::deque<double> history{pop[best_index(pop)].fitness};
    for (int gen = 0; gen < cfg.ga_max_iters && n > 0 && pop.size() > 1; ++gen) {
        std::vector<Individual> next;
        next.push_back(pop[best_index(pop)]);
        while (next.size() < pop.size()) {
            Individual child = tournament(pop, rng);
            const Individual& other = tournament(pop, rng);
            if (n > 1) {
                const std::size_t cut = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
                std::copy(other.hot.begin() + static_cast<std::ptrdiff_t>(cut), other.hot.end(),
                          child.hot.begin() + static_cast<std::ptrdiff_t>(cut));
            }
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t bit = 0; bit < g.block(j); ++bit)
                    if (unit(rng) < p_mut) child.hot[j] = bit;
            g.evaluate(child);
            next.push_back(std::move(child));
        }
        pop = std::move(next);

        history.push_back(pop[best_index(pop)].fitness);
        if (history.size() > static_cast<std::size_t>(cfg.ga_stall)) {
            const double old = history.front();
            history.pop_front();
            const double now = history.back();
            const bool improved = std::isinf(old) ? !std::isinf(now) : old - now >= cfg.ga_epsilon;
            if (!improved) break;
        }
    }

    const Individual& best = pop[best_index(pop)];
    if (std::isinf(best.fitness)) {
        PlanResult stay;
        stay.modes = seed.modes;
        stay.modes.modes.resize(n, Mode::search);
        for (std::size_t j = 0; j < n; ++j) {
            stay.action_indices.push_back(0);
            stay.actions.push_back(ctx.candidates(j)[0]);
        }
        stay.separation_fallback = true;
        return stay;
    }
    return to_result(ctx, g, best);
}

PlanResult plan_ga(const PlanningProblem& problem, Rng& rng) {
    PlanContext ctx(problem);
    return plan_ga(ctx, plan(ctx), rng);
}

}  // namespace searchtrack::control
