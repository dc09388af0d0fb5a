#include <catch2/catch_amalgamated.hpp>

#include "fresco/document.hpp"

using namespace fresco;

namespace {

const char* kExample =
    "# example\n"
    "rank 4\n"
    "lambda 7/2 9/2 11/2 13/2\n"
    "S1 0:1 4:1 6:1\n"
    "S2 0:1\n"
    "S3 0:1\n";

} // namespace

TEST_CASE("document parsing") {
    SECTION("parses and validates the example") {
        FrescoDocument doc = parse_document(kExample);
        REQUIRE(doc.rank == 4);
        REQUIRE(doc.lambda.size() == 4);
        REQUIRE(doc.s.size() == 3);
        REQUIRE_FALSE(doc.truncation);
        Fresco f = document_to_fresco(doc);
        REQUIRE(f.rank() == 4);
        REQUIRE(f.order() == default_order(f.lambdas()));
        REQUIRE(f.connection(1).coeff(4) == 1);
    }
    SECTION("serialize round-trips through parse") {
        FrescoDocument doc = parse_document(kExample);
        std::string text = serialize_document(doc);
        FrescoDocument again = parse_document(text);
        REQUIRE(serialize_document(again) == text);
        REQUIRE(again.lambda == doc.lambda);
        REQUIRE(again.s == doc.s);
    }
    SECTION("fresco_to_document round-trips the presentation") {
        Fresco f = document_to_fresco(parse_document(kExample));
        FrescoDocument doc = fresco_to_document(f);
        Fresco g = document_to_fresco(doc);
        REQUIRE(g.lambdas() == f.lambdas());
        for (int j = 1; j < f.rank(); ++j) REQUIRE(agree(g.connection(j), f.connection(j)));
    }
}

TEST_CASE("document validation errors carry field pointers") {
    auto field_of = [](const std::string& text) {
        try {
            document_to_fresco(parse_document(text));
        } catch (const ValidationError& e) {
            return e.field;
        }
        return std::string("no error");
    };
    SECTION("missing pieces") {
        REQUIRE(field_of("lambda 2\n") == "rank");
        REQUIRE(field_of("rank 1\n") == "lambda");
    }
    SECTION("inconsistent lengths") {
        REQUIRE(field_of("rank 2\nlambda 4\nS1 0:1\n") == "lambda");
        REQUIRE(field_of("rank 2\nlambda 4 5\n") == "S");
    }
    SECTION("geometric condition cited with the offending invariant") {
        std::string f = field_of("rank 2\nlambda 0 4\nS1 0:1\n");
        REQUIRE(f == "lambda[1]");
        try {
            document_to_fresco(parse_document("rank 2\nlambda 0 4\nS1 0:1\n"));
        } catch (const ValidationError& e) {
            REQUIRE(std::string(e.what()).find("lambda_j + j > k") != std::string::npos);
        }
    }
    SECTION("non-principal order") {
        REQUIRE(field_of("rank 2\nlambda 4 2\nS1 0:1\n") == "lambda[2]");
    }
    SECTION("bad connection data") {
        REQUIRE(field_of("rank 2\nlambda 4 5\nS1 0:2\n") == "S1");
        REQUIRE(field_of("rank 2\nlambda 4 5\nS1 0:1 99:1\n") == "S1");
        REQUIRE(field_of("rank 2\nlambda 4 5\nS1 0:1 1:x\n") == "rational");
    }
    SECTION("malformed rationals and integers") {
        REQUIRE_THROWS_AS(parse_rational("1/0"), ValidationError);
        REQUIRE_THROWS_AS(parse_rational("2/3/4"), ValidationError);
        REQUIRE_THROWS_AS(parse_document("rank x\nlambda 2\n"), ValidationError);
    }
}

TEST_CASE("reports") {
    SECTION("deterministic output") {
        FrescoDocument doc = parse_document(kExample);
        ReportOptions opt;
        opt.subtheme = true;
        std::string a = invariant_report(doc, opt).dump(2);
        std::string b = invariant_report(doc, opt).dump(2);
        REQUIRE(a == b);
    }
    SECTION("example content: level 2, not semi-simple, beta diagnostics") {
        Json r = invariant_report(parse_document(kExample));
        REQUIRE(r["stratum"]["level"] == 2);
        REQUIRE(r["stratum"]["semisimple"] == false);
        REQUIRE(r["beta"].is_null());
        REQUIRE(r["invariants"]["p_total"] == "6");
        REQUIRE(r["invariants"]["mu"] == "20");
        REQUIRE(r["invariants"]["bernstein_roots"][0] == "-13/2");
        REQUIRE(r["input"]["truncation"] == 28);
    }
    SECTION("rank-1 report") {
        Json r = invariant_report(parse_document("rank 1\nlambda 2\n"));
        REQUIRE(r["invariants"]["bernstein_roots"] == Json::array({"-2"}));
        REQUIRE(r["stratum"]["level"] == 1);
        REQUIRE(r["stratum"]["semisimple"] == true);
    }
    SECTION("rank-3 beta and subtheme") {
        FrescoDocument doc = parse_document("rank 3\nlambda 4 5 6\nS1 0:1 4:1\nS2 0:1\n");
        ReportOptions opt;
        opt.subtheme = true;
        Json r = invariant_report(doc, opt);
        REQUIRE(r["beta"] == "1");
        REQUIRE(r["stratum"]["semisimple"] == false);
        REQUIRE(r["subtheme"]["lambda1"] == "4");
        REQUIRE(r["subtheme"]["lambda2"] == "7");
        REQUIRE(r["subtheme"]["alpha"] == "1");
    }
    SECTION("rank-1 families in the report") {
        ReportOptions opt;
        opt.rank1_families = true;
        Json r = invariant_report(parse_document("rank 2\nlambda 4 5\nS1 0:1\n"), opt);
        REQUIRE(r["rank1_families"].size() == 2);
        REQUIRE(r["rank1_families"][0]["mu"] == "4");
        REQUIRE(r["rank1_families"][1]["mu"] == "6");
        REQUIRE(r["rank1_families"][1]["directions"].size() == 1);
    }
}
