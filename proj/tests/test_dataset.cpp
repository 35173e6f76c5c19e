#include <cstdio>
#include <filesystem>
#include <fstream>

#include "armada/dataset.hpp"
#include "armada/rng.hpp"
#include "doctest.h"

using namespace armada;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& content, const char* name) {
        path = fs::temp_directory_path() / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("load_csv parses a 3x3 file with a binary response") {
    TempFile f("id,x1,x2,y\ns1,1.0,4.0,0\ns2,2.0,5.0,1\ns3,3.0,6.0,0\n", "armada_t_basic.csv");
    const Dataset d = load_csv(f.path.string(), "y", ResponseKind::Binary);
    CHECK(d.p() == 2);
    CHECK(d.n() == 3);
    CHECK(d.response.kind == ResponseKind::Binary);
    CHECK(d.response.values[0] == 0.0);
    CHECK(d.response.values[1] == 1.0);
    CHECK(d.covariate_names == std::vector<std::string>{"x1", "x2"});
    CHECK(d.matrix(2, 1) == 6.0);  // row order preserved
}

TEST_CASE("load_csv auto-detects tab separator") {
    TempFile f("id\tx1\ty\ns1\t1\t0\ns2\t2\t1\n", "armada_t_tabs.csv");
    const Dataset d = load_csv(f.path.string(), "y", ResponseKind::Binary);
    CHECK(d.p() == 1);
    CHECK(d.matrix(1, 0) == 2.0);
}

TEST_CASE("load_csv error contracts") {
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv("/nonexistent/armada.csv", "y", ResponseKind::Binary), data_error);
    }
    SUBCASE("blank cell names its coordinates") {
        TempFile f("id,x1,y\ns1,1.0,0\ns2,,1\n", "armada_t_blank.csv");
        CHECK_THROWS_WITH_AS(load_csv(f.path.string(), "y", ResponseKind::Binary),
                             doctest::Contains("non-numeric cell at (2,2)"), data_error);
    }
    SUBCASE("missing response column") {
        TempFile f("id,x1,y\ns1,1,0\n", "armada_t_nocol.csv");
        CHECK_THROWS_WITH_AS(load_csv(f.path.string(), "z", ResponseKind::Binary),
                             doctest::Contains("missing response column"), data_error);
    }
    SUBCASE("non-binary response") {
        TempFile f("id,x1,y\ns1,1,0\ns2,2,1\ns3,3,2\n", "armada_t_nonbin.csv");
        CHECK_THROWS_WITH_AS(load_csv(f.path.string(), "y", ResponseKind::Binary),
                             doctest::Contains("non-binary response"), data_error);
    }
    SUBCASE("constant response") {
        TempFile f("id,x1,y\ns1,1,1\ns2,2,1\n", "armada_t_const.csv");
        CHECK_THROWS_WITH_AS(load_csv(f.path.string(), "y", ResponseKind::Binary),
                             doctest::Contains("constant response"), data_error);
    }
}

TEST_CASE("csv round-trip is bit-identical for finite decimals") {
    Rng rng(7);
    Dataset d;
    d.matrix.resize(5, 3);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 3; ++j) d.matrix(i, j) = rng.normal();
    }
    d.covariate_names = {"a", "b", "c"};
    d.sample_ids = {"s1", "s2", "s3", "s4", "s5"};
    d.response.kind = ResponseKind::Binary;
    d.response.values.resize(5);
    d.response.values << 0, 1, 0, 1, 0;

    const fs::path p1 = fs::temp_directory_path() / "armada_t_rt1.csv";
    const fs::path p2 = fs::temp_directory_path() / "armada_t_rt2.csv";
    save_csv(d, p1.string(), "y");
    const Dataset reloaded = load_csv(p1.string(), "y", ResponseKind::Binary);
    CHECK(reloaded.matrix == d.matrix);
    CHECK(reloaded.response.values == d.response.values);
    save_csv(reloaded, p2.string(), "y");
    std::ifstream f1(p1), f2(p2);
    const std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(c1 == c2);
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("standardize matches the n-1 hand computation") {
    Eigen::MatrixXd m(3, 1);
    m << 1, 2, 3;
    const StandardizedMatrix s = standardize(m);
    // sd of (1,2,3) with the n-1 denominator is exactly 1.
    CHECK(s.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.values(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.column_means[0] == 2.0);
    CHECK(s.column_sds[0] == doctest::Approx(1.0));
}

TEST_CASE("standardize invariants and idempotence") {
    Rng rng(11);
    Eigen::MatrixXd m(40, 6);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 6; ++j) m(i, j) = 3.0 * rng.normal() + j;
    }
    const StandardizedMatrix s = standardize(m);
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(s.values.col(j).mean()) < 1e-10);
        const double sd = std::sqrt(s.values.col(j).squaredNorm() / 39.0);
        CHECK(std::abs(sd - 1.0) < 1e-10);
        CHECK(s.column_sds[j] > 0.0);
    }
    const StandardizedMatrix twice = standardize(s.values);
    CHECK((twice.values - s.values).cwiseAbs().maxCoeff() < 1e-10);
    // Invertible via the stored affine transform.
    Eigen::MatrixXd back = s.values;
    for (int j = 0; j < 6; ++j) back.col(j) = back.col(j) * s.column_sds[j] + Eigen::VectorXd::Constant(40, s.column_means[j]);
    CHECK((back - m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("standardize rejects a constant column by name") {
    Eigen::MatrixXd m(3, 2);
    m << 1, 5, 2, 5, 3, 5;
    std::vector<std::string> names = {"ok", "flat"};
    CHECK_THROWS_WITH_AS(standardize(m, &names), doctest::Contains("flat"), data_error);
}

TEST_CASE("dataset validation gates") {
    Dataset d;
    d.matrix = Eigen::MatrixXd::Random(4, 2);
    d.covariate_names = {"a", "b"};
    d.sample_ids = {"1", "2", "3", "4"};
    d.response.kind = ResponseKind::Binary;
    d.response.values.resize(4);
    d.response.values << 0, 0, 1, 1;
    CHECK_NOTHROW(d.validate());

    SUBCASE("n >= 4") {
        d.matrix = Eigen::MatrixXd::Random(3, 2);
        d.response.values.resize(3);
        d.response.values << 0, 1, 0;
        d.sample_ids = {"1", "2", "3"};
        CHECK_THROWS_AS(d.validate(), data_error);
    }
    SUBCASE("binary needs two per class") {
        d.response.values << 0, 1, 1, 1;
        CHECK_THROWS_AS(d.validate(), data_error);
    }
    SUBCASE("unique names") {
        d.covariate_names = {"a", "a"};
        CHECK_THROWS_AS(d.validate(), data_error);
    }
    SUBCASE("continuous needs 3 distinct values") {
        d.response.kind = ResponseKind::Continuous;
        d.response.values << 1, 1, 2, 2;
        CHECK_THROWS_AS(d.validate(), data_error);
    }
}

TEST_SUITE_END();
