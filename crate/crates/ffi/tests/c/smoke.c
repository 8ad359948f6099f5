#include <stdio.h>
#include <string.h>

#include "roundtax.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            const char *e = rt_last_error();                          \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,   \
                    #cond, e ? e : "no error");                       \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(int argc, char **argv) {
    RtRule *rule = NULL;
    CHECK(rt_rule_parse("israel_2008", &rule) == RT_STATUS_OK);
    int64_t v = 0;
    CHECK(rt_rounding_delta(rule, 1998, &v) == RT_STATUS_OK && v == 2);
    CHECK(rt_round_amount(rule, 1004, &v) == RT_STATUS_OK && v == 1000);
    CHECK(rt_round_amount(rule, -1, &v) == RT_STATUS_INPUT);
    CHECK(rt_last_error() != NULL);

    if (argc > 1) {
        RtProfileSet *set = NULL;
        CHECK(rt_profiles_load_dir(argv[1], 0.002, &set) == RT_STATUS_OK);
        CHECK(rt_profiles_len(set) == 3);
        double tax = 0.0;
        CHECK(rt_expected_tax(set, 0, rule, &tax) == RT_STATUS_OK);
        CHECK(tax > 0.0 && tax < 0.1);
        RtSimulationResult sim;
        CHECK(rt_simulate(set, 0, rule, 1000, 7, &sim) == RT_STATUS_OK && sim.n == 1000);
        printf("%s %.6f %.6f\n", rt_profiles_name(set, 0), tax, sim.mean_tax);
        rt_profiles_free(set);
    }

    RtMarket *m = NULL;
    CHECK(rt_market_new(40.8e9, &m) == RT_STATUS_OK);
    CHECK(rt_market_add_store(m, "supermarkets_drugstores", 0.838, 188856, 0.0075) == RT_STATUS_OK);
    CHECK(rt_market_add_store(m, "small_grocery", 0.153, 98822, 0.0058) == RT_STATUS_OK);
    CHECK(rt_market_add_store(m, "convenience", 0.008, 7856, 0.0048) == RT_STATUS_OK);
    double shares[3], total = 0.0;
    CHECK(rt_market_extremize(m, 0.25, RT_SENSE_MIN, RT_WEIGHTS_REVENUE, shares, 3, &total) == RT_STATUS_OK);
    CHECK(shares[1] == 0.0 && shares[2] == 0.0);
    CHECK(rt_market_extremize(m, 1.5, RT_SENSE_MAX, RT_WEIGHTS_REVENUE, shares, 3, &total) == RT_STATUS_INFEASIBLE);
    RtDerivedMetrics dm;
    CHECK(rt_derived_metrics(total, 8.1e6, 3.6097, 40.8e9, &dm) == RT_STATUS_OK);
    printf("version %s\n", rt_version());
    rt_market_free(m);
    rt_rule_free(rule);
    return 0;
}
