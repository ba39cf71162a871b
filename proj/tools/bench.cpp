#include "irt/calibration.hpp"
#include "irt/parallel.hpp"
#include "irt/reference.hpp"
#include "irt/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename F>
double time_best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        f();
        best = std::min(best, ms_since(start));
    }
    return best;
}

} // namespace

int main() {
    const int n_respondents = 2000;
    const int n_items = 60;

    irt::PopulationSpec spec;
    spec.n_respondents = n_respondents;
    spec.ability = irt::AbilityDistribution::normal(0.0, 1.0);
    spec.items = irt::sample_items(n_items, 0.6, 2.4, -2.5, 2.5, 0.0, 0.25, 99);
    spec.seed = 99;
    const auto population = irt::generate_population(spec);

    const auto grid = irt::normal_prior_grid(61, -6.0, 6.0);

    std::printf("E-step kernel, %d respondents x %d items, 61 nodes\n", n_respondents, n_items);
    const double t_ref = time_best_of(3, [&] {
        irt::reference::e_step(population.matrix, spec.items, grid);
    });
    std::printf("  serial reference        %8.2f ms\n", t_ref);

    for (int threads : {1, 2, 4}) {
        irt::set_thread_count(threads);
        const double t = time_best_of(3, [&] {
            irt::e_step(population.matrix, spec.items, grid);
        });
        std::printf("  parallel, %d thread(s)   %8.2f ms   (%.2fx vs reference)\n", threads, t,
                    t_ref / t);
    }

    std::printf("\nAbility estimation, %d respondents, %d items\n", n_respondents, n_items);
    irt::set_thread_count(1);
    const double t_grid = time_best_of(1, [&] {
        std::vector<int> responses(n_items);
        for (int j = 0; j < n_respondents; ++j) {
            for (int i = 0; i < n_items; ++i) responses[i] = population.matrix.at(j, i);
            irt::reference::ability_grid_argmax(responses, spec.items, -6.0, 6.0, 1e-2);
        }
    });
    std::printf("  dense-grid reference    %8.2f ms (step 1e-2)\n", t_grid);

    for (int threads : {1, 2, 4}) {
        irt::set_thread_count(threads);
        const double t = time_best_of(1, [&] {
            irt::estimate_abilities(population.matrix, spec.items, -6.0, 6.0);
        });
        std::printf("  golden-section, %d thr   %8.2f ms   (%.2fx vs reference)\n", threads, t,
                    t_grid / t);
    }

    std::printf("\nFull calibration (EM), %d x %d\n", n_respondents, n_items);
    irt::CalibrationConfig config;
    for (int threads : {1, 2, 4}) {
        irt::set_thread_count(threads);
        const auto start = Clock::now();
        const auto result = irt::calibrate_items(population.matrix, config);
        std::printf("  %d thread(s)             %8.2f ms   (%d EM iterations, ll %.2f)\n",
                    threads, ms_since(start), result.iterations_used, result.log_likelihood);
    }
    return 0;
}
