#include "scram/config.hpp"
#include "scram/error.hpp"

#include "temp_dir.hpp"

#include <gtest/gtest.h>

namespace ts = scram::testsupport;

#include <random>

using namespace scram;
using namespace scram::config;

namespace {

markup::EventList body_of(const std::string& text)
{
    const auto events = markup::tokenize_markup(text, "doc");
    return markup::EventList(events.begin() + static_cast<std::ptrdiff_t>(markup::header_end(events)), events.end());
}

ConfigurationDoc corpus_config()
{
    return parse_configuration(body_of(ts::read_text(ts::fixtures_dir() / "corpus" / "configuration.xml")));
}

RequirementsDoc corpus_requirements()
{
    return parse_requirements(body_of(ts::read_text(ts::fixtures_dir() / "corpus" / "requirements.xml")));
}

Architecture arch(const std::string& s)
{
    return parse_architecture(s);
}

} // namespace

TEST(Architecture, Override)
{
    EXPECT_EQ(detect_architecture("Linux__2.4"), (Architecture{"Linux", "2.4"}));
    EXPECT_EQ(detect_architecture("SunOS__5.8"), (Architecture{"SunOS", "5.8"}));
    EXPECT_THROW(detect_architecture("Linux2.4"), Error);
    EXPECT_THROW(detect_architecture("Linux__x"), Error);
}

TEST(Architecture, DetectedIsWellFormed)
{
    const auto a = detect_architecture();
    EXPECT_NO_THROW(parse_architecture(a.canonical()));
}

// Boundary cases of the prefix rule, enumerated by hand.
TEST(Architecture, MatchBoundaries)
{
    EXPECT_TRUE(match_architecture("SunOS__5", arch("SunOS__5.8")));
    EXPECT_TRUE(match_architecture("", arch("Linux__2.4")));
    EXPECT_TRUE(match_architecture("Linux__2.4", arch("Linux__2.4")));
    EXPECT_FALSE(match_architecture("SunOS__5", arch("SunOS__51")));
    EXPECT_TRUE(match_architecture("SunOS", arch("SunOS__5.8")));
    EXPECT_TRUE(match_architecture("SunOS__", arch("SunOS__5.8")));
    EXPECT_FALSE(match_architecture("Sun", arch("SunOS__5.8")));
    EXPECT_FALSE(match_architecture("Linux__2.4", arch("Linux__2.41")));
    EXPECT_TRUE(match_architecture("Linux__2", arch("Linux__2.4")));
    EXPECT_FALSE(match_architecture("Linux__2.4.1", arch("Linux__2.4")));
    EXPECT_FALSE(match_architecture("SunOS__5.8", arch("Linux__2.4")));
}

TEST(Configuration, CorpusSnippetEntries)
{
    const auto cfg = corpus_config();
    auto has = [&](const std::string& name, const std::string& version, const std::string& scope) {
        for (const auto& e : cfg.entries) {
            if (e.name == name && e.version == version && e.arch_scope == scope)
                return true;
        }
        return false;
    };
    EXPECT_TRUE(has("f77", "4.2", "SunOS__5"));
    EXPECT_TRUE(has("CC", "5.4", "SunOS__5"));
    EXPECT_TRUE(has("gcc3", "3.2", "Linux__2.4"));
    EXPECT_TRUE(has("gcc", "2.95.2", "Linux__2.4"));
    EXPECT_TRUE(has("g77", "0.5.24", "Linux__2.4"));
    EXPECT_TRUE(has("icc", "7.0", "Linux__2.4"));
    EXPECT_TRUE(has("LHCxx", "5.0.3", ""));
    EXPECT_TRUE(has("Qt", "3.1.2", ""));
    EXPECT_TRUE(has("CLHEP", "1.8.0.0", ""));
    EXPECT_EQ(cfg.entries.front().url, "cvs:?module=SCRAMToolBox/Fortran/SunF77");
}

TEST(Configuration, Errors)
{
    EXPECT_THROW(parse_configuration(body_of("<doc type=c version=1><require version=1 url=x>")), ParseError);
    EXPECT_THROW(parse_configuration(body_of("<doc type=c version=1><require name=a version=1 url=x>"
                                             "<require name=A version=2 url=y>")),
                 ParseError);
    EXPECT_NO_THROW(parse_configuration(body_of("<doc type=c version=1><require name=a version=1 url=x>"
                                                "<Architecture name=Linux><require name=a version=2 url=y>")));
}

TEST(Requirements, CorpusSnippet)
{
    const auto req = corpus_requirements();
    ASSERT_TRUE(req.base);
    EXPECT_EQ(*parse_url(*req.base).version(), "CMS_68_2");
    EXPECT_EQ(req.includes, std::vector<std::string>{"cvs:?module=.../CMSconfiguration"});
    const std::vector<SelectEntry> expected{
        {"CC", "SunOS__5.8"},
        {"f77", "SunOS__5.8"},
        {"gcc3", "Linux__2.4"},
        {"g77gcc3", "Linux__2.4"},
        {"COBRA", ""},
        {"IGUANA", ""},
        {"CMSToolBox", ""},
        {"Geometry", ""},
        {"AIDA", ""},
        {"AIDA_Dev", ""},
        {"AIDA_XMLStore", ""},
        {"AIDA_AnalysisFactory_native", ""},
        {"AIDA_Tree_native", ""},
    };
    EXPECT_EQ(req.selects, expected);
}

TEST(Requirements, EmptyAndErrors)
{
    EXPECT_TRUE(parse_requirements(body_of("<doc type=BuildSystem::Requirements version=2.0>")).selects.empty());
    EXPECT_THROW(parse_requirements(body_of("<doc type=r version=1><select>")), ParseError);
    EXPECT_THROW(parse_requirements(body_of("<doc type=r version=1><select name=a><base url=x:y>")), ParseError);
    const auto dup = parse_requirements(body_of("<doc type=r version=1><select name=a><select name=a>"));
    EXPECT_EQ(dup.selects.size(), 1u);
}

TEST(Requirements, SplicedIncludeFillsIncludedConfiguration)
{
    const auto req = parse_requirements(
        body_of("<doc type=r version=1><base url=\"cvs://h/r?version=V\">"
                "<include url=\"cvs:?module=cfg\"><Architecture name=Linux__2.4><require name=gcc version=1 url=u>"
                "</Architecture><require name=qt version=2 url=q></include><select name=gcc>"));
    ASSERT_EQ(req.included.size(), 1u);
    EXPECT_EQ(req.included[0].version_tag, "V");
    ASSERT_EQ(req.included[0].entries.size(), 2u);
    EXPECT_EQ(req.included[0].entries[0].arch_scope, "Linux__2.4");
    EXPECT_EQ(req.included[0].entries[1].arch_scope, "");
    EXPECT_EQ(req.selects, (std::vector<SelectEntry>{{"gcc", ""}}));
}

TEST(Resolution, SingleSelects)
{
    const std::vector<ConfigurationDoc> cfgs{corpus_config()};
    RequirementsDoc r;
    r.selects = {{"gcc3", ""}};
    const auto rc = resolve_selection(r, cfgs, arch("Linux__2.4"));
    ASSERT_EQ(rc.tools.size(), 1u);
    EXPECT_EQ(rc.tools[0], (ResolvedEntry{"gcc3", "3.2", "cvs:?module=SCRAMToolBox/CXX/gcc3"}));

    r.selects = {{"gcc3", "Linux__2.4"}, {"CLHEP", ""}};
    const auto sun = resolve_selection(r, cfgs, arch("SunOS__5.8"));
    ASSERT_EQ(sun.tools.size(), 1u);
    EXPECT_EQ(sun.tools[0].name, "CLHEP");
    EXPECT_EQ(sun.tools[0].version, "1.8.0.0");
}

TEST(Resolution, Errors)
{
    const std::vector<ConfigurationDoc> cfgs{corpus_config()};
    RequirementsDoc r;
    r.selects = {{"nosuch", ""}};
    try {
        resolve_selection(r, cfgs, arch("Linux__2.4"));
        FAIL();
    } catch (const ResolutionError& e) {
        EXPECT_NE(std::string(e.what()).find("nosuch"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("Linux__2.4"), std::string::npos);
    }
    r.selects = {{"gcc3", ""}};
    EXPECT_THROW(resolve_selection(r, cfgs, arch("SunOS__5.8")), ResolutionError);

    ConfigurationDoc amb;
    amb.entries = {{"t", "1", "u1", "Linux"}, {"t", "2", "u2", "Linux"}};
    r.selects = {{"t", ""}};
    EXPECT_THROW(resolve_selection(r, std::vector<ConfigurationDoc>{amb}, arch("Linux__2.4")), ResolutionError);
}

TEST(Resolution, MostSpecificScopeWins)
{
    ConfigurationDoc c;
    c.entries = {{"t", "any", "u", ""}, {"t", "linux", "u", "Linux"}, {"t", "linux24", "u", "Linux__2.4"}};
    RequirementsDoc r;
    r.selects = {{"t", ""}};
    const std::vector<ConfigurationDoc> cfgs{c};
    EXPECT_EQ(resolve_selection(r, cfgs, arch("Linux__2.4")).tools[0].version, "linux24");
    EXPECT_EQ(resolve_selection(r, cfgs, arch("Linux__2.6")).tools[0].version, "linux");
    EXPECT_EQ(resolve_selection(r, cfgs, arch("SunOS__5.8")).tools[0].version, "any");
}

// Adding an Architecture block that does not match never changes the result,
// and selects whose scope does not match are exactly the ones left out.
TEST(Resolution, ScopeProperties)
{
    std::mt19937 rng(7);
    const std::vector<std::string> scopes{"", "Linux", "Linux__2", "Linux__2.4", "SunOS__5", "SunOS__5.8", "IRIX__6"};
    const std::vector<std::string> arches{"Linux__2.4", "Linux__2.6", "SunOS__5.8", "SunOS__5.9"};
    std::uniform_int_distribution<std::size_t> pick_scope(0, scopes.size() - 1);
    for (int round = 0; round < 200; ++round) {
        const auto a = arch(arches[round % arches.size()]);
        ConfigurationDoc c;
        RequirementsDoc r;
        for (int t = 0; t < 5; ++t) {
            const auto name = "t" + std::to_string(t);
            c.entries.push_back({name, "v" + std::to_string(t), "u", ""});
            const auto s = scopes[pick_scope(rng)];
            if (!s.empty())
                c.entries.push_back({name, "s" + std::to_string(t), "u", s});
            r.selects.push_back({name, scopes[pick_scope(rng)]});
        }
        const auto base = resolve_selection(r, std::vector<ConfigurationDoc>{c}, a);

        std::vector<std::string> expected_names;
        for (const auto& s : r.selects) {
            if (match_architecture(s.arch_scope, a))
                expected_names.push_back(s.name);
        }
        std::vector<std::string> names;
        for (const auto& t : base.tools)
            names.push_back(t.name);
        ASSERT_EQ(names, expected_names);

        ConfigurationDoc extended = c;
        for (int t = 0; t < 5; ++t)
            extended.entries.push_back({"t" + std::to_string(t), "other", "u", "AIX__4.3"});
        const auto again = resolve_selection(r, std::vector<ConfigurationDoc>{extended}, a);
        ASSERT_EQ(again.tools, base.tools);
    }
}

TEST(Resolution, CentralVersionChangePropagates)
{
    ConfigurationDoc c;
    c.entries = {{"gcc", "2.95.2", "u", ""}};
    RequirementsDoc p1, p2;
    p1.selects = {{"gcc", ""}, {"x", ""}};
    p2.selects = {{"gcc", ""}};
    c.entries.push_back({"x", "1", "u", ""});
    c.entries[0].version = "3.2";
    const std::vector<ConfigurationDoc> cfgs{c};
    EXPECT_EQ(resolve_selection(p1, cfgs, arch("Linux__2.4")).find("gcc")->version, "3.2");
    EXPECT_EQ(resolve_selection(p2, cfgs, arch("Linux__2.4")).find("GCC")->version, "3.2");
}

TEST(Resolution, RecordRoundTrip)
{
    ConfigurationDoc c;
    c.entries = {{"gcc", "2.95.2", "u", ""}};
    RequirementsDoc r;
    r.selects = {{"gcc", ""}};
    r.base = "cvs://h/r";
    const auto rc = resolve_selection(r, std::vector<ConfigurationDoc>{c}, arch("Linux__2.4"));
    const auto back = configuration_from_record(to_record(rc));
    EXPECT_EQ(back.tools, rc.tools);
    EXPECT_EQ(back.arch, rc.arch);
    EXPECT_EQ(back.base, rc.base);
}
