#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "bnmimo/bnmimo.h"

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    bnm_string_free(s);
    return out;
}

} // namespace

TEST(CApi, VersionAndPresets) {
    EXPECT_STRNE(bnm_version(), "");
    char* list = nullptr;
    ASSERT_EQ(bnm_preset_list(&list), BNM_OK);
    EXPECT_NE(take(list).find("fig10\t"), std::string::npos);
}

TEST(CApi, NullArgumentsAreValidationErrors) {
    EXPECT_EQ(bnm_run_create(nullptr), BNM_ERR_VALIDATION);
    EXPECT_NE(std::string(bnm_last_error()).find("NULL"), std::string::npos);
    EXPECT_EQ(bnm_run_set(nullptr, "nt", "2"), BNM_ERR_VALIDATION);
    bnm_run_destroy(nullptr);
}

TEST(CApi, RunLifecycle) {
    bnm_run* run = nullptr;
    ASSERT_EQ(bnm_run_create(&run), BNM_OK);
    EXPECT_EQ(bnm_run_set(run, "nt", "x"), BNM_ERR_VALIDATION);
    EXPECT_NE(std::string(bnm_last_error()).find("nt"), std::string::npos);
    char* out = nullptr;
    EXPECT_EQ(bnm_run_summary(run, &out), BNM_ERR_VALIDATION); // not executed yet
    ASSERT_EQ(bnm_run_set(run, "nt", "2"), BNM_OK);
    ASSERT_EQ(bnm_run_set(run, "nr", "2"), BNM_OK);
    ASSERT_EQ(bnm_run_set(run, "schemes", "bf,bn"), BNM_OK);
    ASSERT_EQ(bnm_run_set(run, "trials", "100"), BNM_OK);
    ASSERT_EQ(bnm_run_set(run, "snr_stop_db", "4"), BNM_OK);
    ASSERT_EQ(bnm_run_validate(run), BNM_OK);
    ASSERT_EQ(bnm_run_execute(run), BNM_OK);
    ASSERT_EQ(bnm_run_render(run, "csv", &out), BNM_OK);
    EXPECT_NE(take(out).find("rho_db,scheme,mean_bits,stderr,trials"), std::string::npos);
    ASSERT_EQ(bnm_run_summary(run, &out), BNM_OK);
    EXPECT_NE(take(out).find("bn"), std::string::npos);
    EXPECT_EQ(bnm_run_render(run, "xml", &out), BNM_ERR_VALIDATION);
    EXPECT_EQ(bnm_run_write(run, "/nonexistent-dir/a.csv", "csv", nullptr), BNM_ERR_IO);
    ASSERT_EQ(bnm_run_config_text(run, &out), BNM_OK);
    EXPECT_NE(take(out).find("schemes=bf,bn\n"), std::string::npos);
    bnm_run_destroy(run);
}

TEST(CApi, EmptyGridIsValidationError) {
    bnm_run* run = nullptr;
    ASSERT_EQ(bnm_run_create(&run), BNM_OK);
    ASSERT_EQ(bnm_run_set(run, "snr_start_db", "5"), BNM_OK);
    ASSERT_EQ(bnm_run_set(run, "snr_stop_db", "0"), BNM_OK);
    EXPECT_EQ(bnm_run_execute(run), BNM_ERR_VALIDATION);
    bnm_run_destroy(run);
}

TEST(CApi, MissingConfigFileIsIoError) {
    bnm_run* run = nullptr;
    ASSERT_EQ(bnm_run_create(&run), BNM_OK);
    EXPECT_EQ(bnm_run_load_config(run, "/nonexistent/x.cfg"), BNM_ERR_IO);
    EXPECT_EQ(bnm_run_apply_preset(run, "nope"), BNM_ERR_VALIDATION);
    EXPECT_EQ(bnm_run_load_config_text(run, "nt=3\nnr=3\n"), BNM_OK);
    bnm_run_destroy(run);
}

TEST(CApi, SelftestAndFault) {
    char* rep = nullptr;
    ASSERT_EQ(bnm_selftest(7, 200, 0, &rep), BNM_OK);
    const std::string a = take(rep);
    ASSERT_EQ(bnm_selftest(7, 200, 0, &rep), BNM_OK);
    EXPECT_EQ(a, take(rep));
    EXPECT_EQ(bnm_selftest(7, 200, 1, &rep), BNM_ERR_SELFTEST);
    const std::string f = take(rep);
    EXPECT_NE(f.find("FAIL complement-orthogonality"), std::string::npos);
    EXPECT_EQ(bnm_selftest(7, 0, 0, &rep), BNM_ERR_VALIDATION);
}

TEST(CApi, CapacityAndLdc) {
    const double sigma[3] = {2.0, 1.0, 0.5};
    double c = 0;
    ASSERT_EQ(bnm_capacity_bits("bn", sigma, 3, 2.0, 3, &c), BNM_OK);
    EXPECT_NEAR(c, std::log2(5.0) + 1.0, 1e-12);
    EXPECT_EQ(bnm_capacity_bits("bn", sigma, 2, 2.0, 3, &c), BNM_ERR_VALIDATION);
    EXPECT_EQ(bnm_capacity_bits("zz", sigma, 3, 2.0, 3, &c), BNM_ERR_VALIDATION);
    char* j = nullptr;
    ASSERT_EQ(bnm_ldc_export_json(3, 3, &j), BNM_OK);
    EXPECT_NE(take(j).find("\"dispersion\""), std::string::npos);
    EXPECT_EQ(bnm_ldc_export_json(3, 2, &j), BNM_ERR_VALIDATION);
}
