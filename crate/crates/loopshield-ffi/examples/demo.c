/* Minimal consumer of the loopshield C ABI: run the gain-attack scenario
 * and print the pipeline milestones.
 *
 * Build (after `cargo build --release -p loopshield-ffi`):
 *   cc demo.c -I ../include -L ../../../target/release -lloopshield_ffi \
 *      -lpthread -ldl -lm -o demo
 */
#include "loopshield.h"

#include <stdio.h>

static void die(const char *what) {
    char msg[256];
    ls_last_error_message(msg, sizeof msg);
    fprintf(stderr, "%s: %s\n", what, msg);
}

int main(void) {
    printf("loopshield %s\n", ls_version());

    LsScenario *scenario = NULL;
    if (ls_scenario_golden("gain160", &scenario) != LS_STATUS_OK) {
        die("loading scenario");
        return 1;
    }

    LsRunResult *result = NULL;
    if (ls_run(scenario, &result) != LS_STATUS_OK) {
        die("running scenario");
        ls_scenario_free(scenario);
        return 1;
    }

    bool has = false;
    double detection = 0.0, swap = 0.0, peak = 0.0, sse = 0.0;
    ls_run_result_detection_time(result, &has, &detection);
    if (has)
        printf("attack detected at t = %.3f s\n", detection);
    ls_run_result_swap_time(result, &has, &swap);
    if (has)
        printf("controller swapped at t = %.3f s\n", swap);
    ls_run_result_peak_output(result, &peak);
    ls_run_result_steady_state_error(result, &sse);
    printf("peak |y| = %.4f, steady-state error = %.6f\n", peak, sse);

    ls_run_result_free(result);
    ls_scenario_free(scenario);
    return 0;
}
