#include <doctest.h>

#include "c3bv/datasets.hpp"
#include "tmpdir.hpp"

using namespace c3bv;

TEST_SUITE("datasets") {
  TEST_CASE("two-line MovieLens file") {
    const auto dir = test_tmp("ml_toy");
    write_text(dir / "u.data", "196\t242\t3\t881250949\n186\t302\t3\t891717742\n");
    const auto t = parse_movielens(dir / "u.data");
    CHECK(t.size() == 2);
    CHECK(t.num_users() == 2);
    CHECK(t.num_items() == 2);
    CHECK(t.triples()[0].user == 0);
    CHECK(t.triples()[1].user == 1);
    CHECK(t.triples()[1].item == 1);
    CHECK(t.user_ids()[0] == "196");
    CHECK(t.triples()[0].timestamp == 881250949);
  }

  TEST_CASE("duplicates keep the latest timestamp") {
    const auto dir = test_tmp("ml_dup");
    write_text(dir / "u.data", "1\t1\t5\t200\n1\t1\t2\t100\n2\t1\t4\t10\n2\t1\t1\t10\n");
    const auto t = parse_movielens(dir / "u.data");
    REQUIRE(t.size() == 2);
    CHECK(t.triples()[0].rating == 5.0);
    CHECK(t.triples()[1].rating == 1.0);  // equal stamps: later line wins
  }

  TEST_CASE("malformed MovieLens lines report the line number") {
    const auto dir = test_tmp("ml_bad");
    write_text(dir / "u.data", "1\t1\t5\t200\n1\t2\t5\n");
    try {
      parse_movielens(dir / "u.data");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    write_text(dir / "u2.data", "1\t1\tfive\t200\n");
    CHECK_THROWS_AS(parse_movielens(dir / "u2.data"), ParseError);
    write_text(dir / "empty.data", "");
    CHECK_THROWS_AS(parse_movielens(dir / "empty.data"), ParseError);
    CHECK_THROWS_AS(parse_movielens(dir / "missing.data"), IoError);
  }

  TEST_CASE("Amazon 5-core records") {
    const auto dir = test_tmp("amazon");
    write_text(dir / "a.json",
               "{\"reviewerID\": \"A1\", \"asin\": \"B01\", \"overall\": 5.0, \"unixReviewTime\": 1400000000, \"reviewText\": \"ok\"}\n"
               "{\"reviewerID\": \"A2\", \"asin\": \"B01\", \"overall\": 3.0, \"unixReviewTime\": 1400000001}\n"
               "{\"reviewerID\": \"A1\", \"asin\": \"B02\", \"overall\": 4.0}\n");
    const auto t = parse_amazon_5core(dir / "a.json");
    CHECK(t.size() == 3);
    CHECK(t.num_users() == 2);
    CHECK(t.num_items() == 2);
    CHECK_FALSE(t.triples()[2].timestamp.has_value());
    write_text(dir / "b.json", "{\"reviewerID\": \"A1\", \"asin\": \"B01\", \"overall\": 5.0}\n{oops\n");
    try {
      parse_amazon_5core(dir / "b.json");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    write_text(dir / "c.json", "{\"reviewerID\": \"A1\", \"overall\": 5.0}\n");
    CHECK_THROWS_AS(parse_amazon_5core(dir / "c.json"), ParseError);
  }

  TEST_CASE("CSV round trip") {
    const auto dir = test_tmp("csv");
    RatingTable t;
    t.add("u1", "i1", 4.5, 10);
    t.add("u2", "i1", 1.0, std::nullopt);
    t.add("u1", "i2", 0.1, 12);
    write_rating_table(t, dir / "t.csv");
    const auto back = read_rating_table(dir / "t.csv");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back.triples()[i].user == t.triples()[i].user);
      CHECK(back.triples()[i].item == t.triples()[i].item);
      CHECK(back.triples()[i].rating == t.triples()[i].rating);
      CHECK(back.triples()[i].timestamp == t.triples()[i].timestamp);
    }
    CHECK(back.user_ids() == t.user_ids());
  }
}
