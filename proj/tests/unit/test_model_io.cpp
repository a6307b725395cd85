#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "rrwqbd/model_io.hpp"
#include "support/instances.hpp"

using namespace rrwqbd;

namespace {

const char* kJackson = R"(# symmetric instance
kind = "jackson"
lambda1 = 0.1
lambda2 = 0.1
sigma1 = 0.4
sigma2 = 0.4
q1 = 0.5
q2 = 0.5
)";

int error_line(const std::string& text) {
    try {
        parse_model(text);
    } catch (const ModelParseError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("jackson model file") {
    const auto mf = parse_model(kJackson);
    CHECK(mf.kind == "jackson");
    REQUIRE(mf.jackson.has_value());
    CHECK(mf.jackson->lambda1() == Catch::Approx(0.1));
    CHECK(mf.spec == jackson_spec(JacksonParams(0.1, 0.1, 0.4, 0.4, 0.5, 0.5)));
}

TEST_CASE("general model file matches the jackson laws") {
    const auto mf = load_model(RRWQBD_MODELS "/general_symmetric.toml");
    CHECK(mf.kind == "general");
    CHECK_FALSE(mf.jackson.has_value());
    const auto js = jackson_spec(JacksonParams(0.1, 0.1, 0.4, 0.4, 0.5, 0.5));
    for (Region r : kAllRegions)
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                CHECK(mf.spec.law(r).prob(dx, dy) == Catch::Approx(js.law(r).prob(dx, dy)).margin(1e-15));
}

TEST_CASE("general format round-trips exactly") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 40; ++t) {
        const auto spec = testing_support::random_spec(rng);
        const auto back = parse_model(format_general_model(spec));
        CHECK(back.spec == spec);
    }
}

TEST_CASE("parse errors carry line numbers") {
    CHECK(error_line("kind = \"jackson\"\nlambda1 = 0.1\nlambda1 = 0.2\n") == 3);
    CHECK(error_line("kind = \"jackson\"\nlambda1 = abc\n") == 2);
    CHECK(error_line("kind = \"general\"\n[origin]\n\"2,0\" = 1.0\n") == 3);
    CHECK(error_line("kind = \"jackson\"\nlambda1 = 0.1\nfoo = 1\n") > 0);
    CHECK(error_line("lambda1 = 0.1\n") == 1);
    CHECK(error_line("kind = \"general\"\n[origin]\n\"0,0\" = 1.0\n") > 0);  // missing tables
    CHECK(error_line("kind = \"weird\"\n") == 1);
    CHECK(error_line("kind = \"jackson\"\nlambda1 = 0.1 trailing\n") == 2);
    CHECK(error_line(std::string(kJackson) + "[origin]\n") > 0);
}

TEST_CASE("invalid jackson values are reported as parse errors") {
    std::string text = kJackson;
    text.replace(text.find("q1 = 0.5"), 8, "q1 = 1.5");
    CHECK_THROWS_AS(parse_model(text), ModelParseError);
}

TEST_CASE("renormalize flag rescales laws") {
    std::string text = format_general_model(jackson_spec(JacksonParams(0.1, 0.1, 0.4, 0.4, 0.5, 0.5)));
    const auto pos = text.find("\"0,0\" = ");
    REQUIRE(pos != std::string::npos);
    const auto eol = text.find('\n', pos);
    text.replace(pos, eol - pos, "\"0,0\" = 1.6");
    const auto raw = parse_model(text);
    CHECK_FALSE(validate_spec(raw.spec).ok());
    const auto fixed = parse_model("renormalize = true\n" + text);
    CHECK(validate_spec(fixed.spec).ok());
    CHECK(fixed.spec.law(Region::Origin).prob(1, 0) == Catch::Approx(0.1 / 1.8));
}

TEST_CASE("missing file") {
    CHECK_THROWS(load_model("/nonexistent/model.toml"));
}
