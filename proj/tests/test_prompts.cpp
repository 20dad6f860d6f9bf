#include <catch2/catch_amalgamated.hpp>

#include "melkit/prompts.hpp"

#include "helpers.hpp"

using namespace melkit;

namespace {

Entity apec_entity() {
  Entity e;
  e.id = "e-apec";
  e.name = "Asia-Pacific Economic Cooperation";
  e.description =
      "The Asia-Pacific Economic Cooperation is an inter-governmental forum "
      "for 21 member economies in the Pacific Rim that promotes free trade "
      "throughout the Asia-Pacific region.";
  return e;
}

Entity court_entity() {
  Entity e;
  e.id = "e-court";
  e.name = "Superior Court (TV series)";
  e.description =
      "Superior Court is a dramatized court show that aired in syndication "
      "from 1986 to 1989.";
  return e;
}

Mention apec_mention() {
  Mention m;
  m.id = "m-apec";
  m.name = "APEC";
  m.context =
      "APEC Leaders wave for the media dressed in Driza-Bones in Sydney, "
      "Australia.";
  m.image_ref = "images/apec.png";
  return m;
}

Mention court_mention() {
  Mention m;
  m.id = "m-court";
  m.name = "Superior Court";
  m.context =
      "The third dated stamp; October 6, 2008. A stamp belonging to the "
      "Superior Court with the registrar's signature and mark of acceptance.";
  m.image_ref = "images/court.png";
  return m;
}

}  // namespace

TEST_CASE("entity-summary prompt matches goldens byte-for-byte", "[prompts]") {
  REQUIRE(render_entity_summary_prompt(apec_entity()) ==
          testkit::fixture("tea_apec.txt"));
  REQUIRE(render_entity_summary_prompt(court_entity()) ==
          testkit::fixture("tea_superior_court.txt"));
}

TEST_CASE("mention prompt matches goldens byte-for-byte", "[prompts]") {
  MentionPrompt apec = render_mention_prompt(apec_mention());
  REQUIRE(apec.text == testkit::fixture("tma_apec.txt"));
  REQUIRE(apec.wants_image);

  MentionPrompt court = render_mention_prompt(court_mention());
  REQUIRE(court.text == testkit::fixture("tma_superior_court.txt"));

  Mention no_image = apec_mention();
  no_image.image_ref.reset();
  REQUIRE_FALSE(render_mention_prompt(no_image).wants_image);
}

TEST_CASE("selection prompt matches goldens byte-for-byte", "[prompts]") {
  Mention apec = apec_mention();
  apec.description =
      "The APEC refer to the Asia-Pacific Economic Cooperation, an "
      "inter-governmental forum that promotes free trade across the Pacific "
      "Rim.";
  std::vector<TableEntry> apec_table = {
      {"e1", "APEC summit",
       "The APEC summit is the annual meeting of leaders from the member "
       "economies of the Asia-Pacific Economic Cooperation."},
      {"e2", "Asia-Pacific Economic Cooperation",
       "APEC is an inter-governmental forum of 21 member economies in the "
       "Pacific Rim that promotes free trade."},
      {"e3", "Asia-Europe Meeting",
       "The Asia-Europe Meeting is an intergovernmental process established "
       "to foster dialogue between Asia and Europe."}};
  REQUIRE(render_selection_prompt(apec, apec_table) ==
          testkit::fixture("tms_apec.txt"));

  Mention court = court_mention();
  court.extra["category"] = "Organization";
  court.description =
      "Superior Court is a legal organization that operates within a court "
      "system, providing a forum for the resolution of disputes and the "
      "administration of justice.";
  std::vector<TableEntry> court_table = {
      {"e1", "Superior Court (TV series)",
       "Superior Court was a syndicated court show that aired from 1986 to "
       "1989, featuring fictionalized re-enactments of real court cases."},
      {"e2", "Superior court",
       "In common law systems, a superior court is a court of general "
       "jurisdiction over civil and criminal legal cases."},
      {"e3", "Superior Court of Justice",
       "The Superior Court of Justice is a superior trial court in Ontario, "
       "Canada."},
      {"e4", "California superior courts",
       "Superior courts in California are the state trial courts with general "
       "jurisdiction over civil and criminal matters."},
      {"e5", "Supreme Court of the United States",
       "The Supreme Court of the United States is the highest court in the "
       "federal judiciary of the United States."}};
  REQUIRE(render_selection_prompt(court, court_table) ==
          testkit::fixture("tms_superior_court.txt"));
}

TEST_CASE("mention block: category is conditional, description always present",
          "[prompts]") {
  Mention m;
  m.id = "m";
  m.name = "X";
  m.context = "ctx";
  REQUIRE(render_mention_block(m) == "### Mention\nName: X\nContext: ctx\nDescription: ");

  m.description = "desc";
  REQUIRE(render_mention_block(m) ==
          "### Mention\nName: X\nContext: ctx\nDescription: desc");

  m.extra["category"] = "Person";
  REQUIRE(render_mention_block(m) ==
          "### Mention\nName: X\nContext: ctx\nCategory: Person\nDescription: desc");
}

TEST_CASE("entity table flattens newlines and indexes from zero", "[prompts]") {
  std::vector<TableEntry> entries = {{"e1", "Na\nme", "su\r\nmm"},
                                     {"e2", "Two", "plain"}};
  REQUIRE(render_entity_table(entries) ==
          "### Entity table\n0. Na me: su mm\n1. Two: plain");

  Mention m;
  m.id = "m";
  m.name = "X";
  m.context = "c";
  REQUIRE_ERROR(render_selection_prompt(m, {}), empty_candidates);
}

TEST_CASE("slot replacement covers repeated slots", "[prompts]") {
  Entity e;
  e.id = "e";
  e.name = "A{name}B";  // a value containing the slot text is not re-expanded
  e.description = "d";
  std::string out = render_entity_summary_prompt(e);
  REQUIRE(out.find("Entity name: A{name}B\n") != std::string::npos);

  Entity blank;
  blank.id = "e";
  blank.description = "d";
  REQUIRE_ERROR(render_entity_summary_prompt(blank), precondition);
  Mention m;
  m.id = "m";
  m.context = "c";
  REQUIRE_ERROR(render_mention_prompt(m), precondition);
}

TEST_CASE("template hashes are stable tags", "[prompts]") {
  for (const std::string& h :
       {entity_summary_template_hash(), mention_template_hash(),
        selection_template_hash()}) {
    REQUIRE(h.size() == 8);
    for (char c : h) REQUIRE(std::string("0123456789abcdef").find(c) != std::string::npos);
  }
  REQUIRE(entity_summary_template_hash() != mention_template_hash());
  REQUIRE(mention_template_hash() != selection_template_hash());
}
