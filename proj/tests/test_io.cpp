#include <gtest/gtest.h>

#include "funpls/io.hpp"
#include "test_support.hpp"

using namespace funpls;
using namespace funpls::testing;

TEST(CsvCurves, ParsesRowsAndWhitespace) {
    const Matrix x = io::parse_curves_csv("1,2,3\n 4.5 , -6e-1,+7\n\n");
    ASSERT_EQ(x.rows(), 2);
    ASSERT_EQ(x.cols(), 3);
    EXPECT_EQ(x(1, 1), -0.6);
    EXPECT_EQ(x(1, 2), 7.0);
    const Matrix crlf = io::parse_curves_csv("1,2\r\n3,4\r\n");
    EXPECT_EQ(crlf(1, 1), 4.0);
}

TEST(CsvCurves, ReportsLineAndColumn) {
    try {
        io::parse_curves_csv("1,2,3\n4,x5,6\n", "c.csv");
        FAIL();
    } catch (const io::ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 3u);
        EXPECT_NE(std::string(e.what()).find("c.csv:2:3"), std::string::npos);
    }
    try {
        io::parse_curves_csv("1,2,3\n4,5\n");
        FAIL();
    } catch (const io::ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(io::parse_curves_csv(""), io::ParseError);
    EXPECT_THROW(io::parse_curves_csv("1,,2\n"), io::ParseError);
    EXPECT_THROW(io::parse_curves_csv("1,2,3,4\n5,6,7,8\n"
                                      "1,nan,1,1\n"),
                 io::ParseError);
}

TEST(CsvResponses, OnePerLine) {
    const Vector y = io::parse_responses_csv("1.5\n-2\n3e2\n");
    ASSERT_EQ(y.size(), 3);
    EXPECT_EQ(y(2), 300.0);
    EXPECT_THROW(io::parse_responses_csv("1,2\n"), io::ParseError);
}

TEST(CsvGrid, HeaderAndValidation) {
    const Grid g = io::parse_grid_csv("point,weight\n0,0.25\n0.5,0.5\n1,0.25\n");
    EXPECT_EQ(g.size(), 3);
    EXPECT_EQ(g.upper(), 1.0);
    EXPECT_THROW(io::parse_grid_csv("p,w\n0,1\n1,1\n"), io::ParseError);
    EXPECT_THROW(io::parse_grid_csv("point,weight\n0,0.1\n1,0.1\n"), InputError);
}

TEST(CsvWriters, RoundTripExactly) {
    std::mt19937_64 rng(141);
    const Matrix x = random_matrix(rng, 4, 7);
    EXPECT_EQ(io::parse_curves_csv(io::curves_to_csv(x)), x);
    const Vector v = random_vector(rng, 9);
    EXPECT_EQ(io::parse_responses_csv(io::vector_to_csv(v)), v);
    const Grid g = Grid::uniform(0.0, 3.0, 13);
    EXPECT_TRUE(io::parse_grid_csv(io::grid_to_csv(g)) == g);
}

TEST(ModelJson, RoundTripIsBitExact) {
    const Dataset d = random_dataset(unit_grid(30), 25, 142);
    for (Method method : {Method::apls_raw, Method::apls_qr, Method::apls_ortho, Method::classic, Method::pca}) {
        const LinearModel m = fit_method(d, method, 3);
        const std::string text = io::dump(io::model_to_json(m));
        const LinearModel back = io::model_from_json(io::json::parse(text));
        EXPECT_EQ(back.variant, m.variant);
        EXPECT_EQ(back.p, m.p);
        EXPECT_TRUE(*back.grid() == *m.grid());
        EXPECT_EQ(back.mean_curve.values, m.mean_curve.values);
        EXPECT_EQ(back.mean_y, m.mean_y);
        EXPECT_EQ(back.coefficients, m.coefficients);
        EXPECT_EQ(back.slope.values, m.slope.values);
        for (Index i = 0; i < d.n(); ++i) {
            const Curve x(back.grid(), d.curves.row(i).transpose());
            EXPECT_EQ(predict(back, x), predict(m, d.curve(i)));
        }
        EXPECT_EQ(io::dump(io::model_to_json(back)), text);
    }
}

TEST(ModelJson, RejectsMalformedDocuments) {
    const Dataset d = random_dataset(unit_grid(12), 10, 143);
    io::json j = io::model_to_json(fit_method(d, Method::pca, 2));
    io::json bad = j;
    bad["variant"] = "lasso";
    EXPECT_THROW(io::model_from_json(bad), InputError);
    bad = j;
    bad["p"] = 3;
    EXPECT_THROW(io::model_from_json(bad), InputError);
    bad = j;
    bad.erase("mean_y");
    EXPECT_THROW(io::model_from_json(bad), InputError);
    bad = j;
    bad["basis"][0] = std::vector<double>{1.0, 2.0};
    EXPECT_THROW(io::model_from_json(bad), InputError);
}

TEST(SpectralJson, RoundTripAndShorthand) {
    const SpectralModel m = small_model(4, 20, 0.3);
    const SpectralModel back = io::spectral_from_json(io::json::parse(io::spectral_to_json(m).dump()));
    EXPECT_EQ(back.eigenvalues, m.eigenvalues);
    EXPECT_EQ(back.slope_coefficients, m.slope_coefficients);
    EXPECT_EQ(back.noise_sd, 0.3);
    EXPECT_EQ(back.eigenfunctions[2].values, m.eigenfunctions[2].values);
    const io::json shorthand = io::json::parse(R"({"grid": {"lower": 0, "upper": 1, "size": 20},
        "eigenvalues": [1.0, 0.5], "slope_coefficients": [1, -1], "basis": "sine"})");
    const SpectralModel s = io::spectral_from_json(shorthand);
    EXPECT_EQ(s.rank(), 2u);
    EXPECT_EQ(s.noise_sd, 0.0);
    EXPECT_TRUE(s.mean_curve.values.isZero(0.0));
    EXPECT_THROW(io::spectral_from_json(io::json::parse(R"({"grid": {"lower": 0, "upper": 1, "size": 20},
        "eigenvalues": [1.0], "slope_coefficients": [1]})")),
                 InputError);
}

TEST(SpecJson, BenchSpecFields) {
    const io::json j = io::json::parse(R"({
        "model": {"grid": {"lower": 0, "upper": 1, "size": 32}, "eigenvalues": [1, 0.5, 0.25],
                  "slope_coefficients": [1, 1, 1], "basis": "sine"},
        "case": "custom", "n_train": 20, "n_test": 40, "replicates": 2, "seed": 18446744073709551615,
        "p_range": [1, 2], "methods": ["pca", "classic"], "sigma_rule": false})");
    const SimulationSpec s = io::simulation_spec_from_json(j);
    EXPECT_EQ(s.seed, 18446744073709551615ULL);
    EXPECT_EQ(s.p_max, 2u);
    EXPECT_EQ(s.methods.size(), 2u);
    EXPECT_FALSE(s.sigma_rule);
    io::json bad = j;
    bad["methods"] = {"ridge"};
    EXPECT_THROW(io::simulation_spec_from_json(bad), InputError);
    bad = j;
    bad["seed"] = -1;
    EXPECT_THROW(io::simulation_spec_from_json(bad), InputError);
    bad = j;
    bad["replicates"] = 0;
    EXPECT_THROW(io::simulation_spec_from_json(bad), InputError);
}

TEST(SpecJson, RateSpecRescales) {
    const io::json j = io::json::parse(R"({
        "model": {"grid": {"lower": 0, "upper": 1, "size": 32}, "eigenvalues": [3, 2, 1],
                  "slope_coefficients": [1, 1, 1], "basis": "sine"},
        "kernel_norm": 0.5, "n_values": [100, 200], "j_values": [1, 2], "replicates": 3, "seed": 9})");
    const io::RateSpec s = io::rate_spec_from_json(j);
    EXPECT_NEAR(s.model.kernel_hs_norm(), 0.5, tol::exact);
    EXPECT_EQ(s.replicates, 3u);
}

TEST(ResultCsv, HeadersAndEmptyFields) {
    std::vector<BenchRecord> rec{{Method::pca, 2, 0, 0.5, std::nullopt, std::nullopt, ""},
                                 {Method::apls_raw, 9, 1, std::nullopt, std::nullopt, std::nullopt, "ill_conditioned"}};
    EXPECT_EQ(io::records_to_csv(rec),
              "method,p,replicate,pe,ise,pe_hat,error\npca,2,0,0.5,,,\napls_raw,9,1,,,,ill_conditioned\n");
    const std::vector<RateRow> rows{{100, 1, 0.25, 0.125, -0.5, -0.5}};
    EXPECT_EQ(io::rates_to_csv(rows), "n,j,median_err,h_err,slope\n100,1,0.25,0.125,-0.5\n");
}
