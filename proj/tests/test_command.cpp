#include <doctest.h>

#include <string>
#include <vector>

#include "taskguard/command.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/rng.hpp"

using namespace taskguard;

TEST_CASE("the four templates parse into their intents") {
    CommandIntent sel = parse_command("select the Add to Cart item");
    CHECK(sel.verb == Verb::select);
    CHECK(sel.caption == "Add to Cart");
    CHECK(sel.words.empty());

    CommandIntent right = parse_command("click the item to the right of Qty");
    CHECK(right.verb == Verb::click_right_of);
    CHECK(right.caption == "Qty");

    CommandIntent ent = parse_command("enter gloves into Search Amazon");
    CHECK(ent.verb == Verb::enter);
    CHECK(ent.caption == "Search Amazon");
    CHECK(ent.words == "gloves");

    CommandIntent scr = parse_command("scroll until See All Buying Options");
    CHECK(scr.verb == Verb::scroll_until);
    CHECK(scr.caption == "See All Buying Options");
}

TEST_CASE("free-form text is rejected with a parse error") {
    CHECK_THROWS_AS((void)parse_command("frobnicate the widget"), CommandParseError);
    CHECK_THROWS_AS((void)parse_command(""), CommandParseError);
    CHECK_THROWS_AS((void)parse_command("select the item"), CommandParseError);
    CHECK_THROWS_AS((void)parse_command("enter into Search"), CommandParseError);
    CHECK_THROWS_AS((void)parse_command("click the Sort by price button"), CommandParseError);
}

TEST_CASE("template words match case-insensitively, captions keep their case") {
    CommandIntent sel = parse_command("SELECT THE Add to Cart ITEM");
    CHECK(sel.verb == Verb::select);
    CHECK(sel.caption == "Add to Cart");

    CommandIntent scr = parse_command("Scroll Until Delivery notes");
    CHECK(scr.caption == "Delivery notes");
}

TEST_CASE("surrounding whitespace collapses before matching") {
    CommandIntent sel = parse_command("  select   the  Add to Cart   item  ");
    CHECK(sel.caption == "Add to Cart");
}

TEST_CASE("enter splits at the first 'into' so captions may contain the word") {
    CommandIntent ent = parse_command("enter dive into deep into Search box");
    CHECK(ent.words == "dive");
    CHECK(ent.caption == "deep into Search box");
}

TEST_CASE("select strips only the final 'item' so captions may end with it") {
    CommandIntent sel = parse_command("select the News item item");
    CHECK(sel.caption == "News item");
}

TEST_CASE("render is the inverse of parse") {
    CHECK(render_command({Verb::select, "Add to Cart", ""}) == "select the Add to Cart item");
    CHECK(render_command({Verb::click_right_of, "Qty", ""}) ==
          "click the item to the right of Qty");
    CHECK(render_command({Verb::enter, "Search Amazon", "gloves"}) ==
          "enter gloves into Search Amazon");
    CHECK(render_command({Verb::scroll_until, "Promotions & Offers", ""}) ==
          "scroll until Promotions & Offers");
}

TEST_CASE("render rejects intents that would not round-trip") {
    CHECK_THROWS_AS((void)render_command({Verb::select, "", ""}), ValidationError);
    CHECK_THROWS_AS((void)render_command({Verb::enter, "Search", ""}), ValidationError);
    CHECK_THROWS_AS((void)render_command({Verb::enter, "Search", "a into b"}), ValidationError);
}

TEST_CASE("parse after render is the identity over random intents") {
    static const char* captions[] = {"Add to Cart",   "Search Amazon", "Sort by: Featured",
                                     "News item",     "Qty",           "See All Buying Options",
                                     "Delivery notes"};
    static const char* words[] = {"gloves", "wool gloves", "alice", "4111", "x"};
    SeededRng rng(77);
    for (int i = 0; i < 500; ++i) {
        CommandIntent intent;
        intent.verb = static_cast<Verb>(rng.below(4));
        intent.caption = captions[rng.below(7)];
        if (intent.verb == Verb::enter) intent.words = words[rng.below(5)];
        REQUIRE(parse_command(render_command(intent)) == intent);
    }
}
