#include "scram/error.hpp"
#include "scram/markup.hpp"
#include "scram/toolspec.hpp"

#include "temp_dir.hpp"

#include <gtest/gtest.h>

namespace ts = scram::testsupport;

using namespace scram;
using namespace scram::toolspec;
namespace fs = std::filesystem;

namespace {

ToolSpec parse_text(const std::string& text)
{
    const auto events = markup::tokenize_markup(text, "doc");
    const auto end = markup::header_end(events);
    return parse_tool_doc(std::span(events).subspan(end));
}

ToolSpec boost()
{
    return parse_text(ts::read_text(ts::fixtures_dir() / "corpus" / "boost_tooldoc.xml"));
}

LibraryProber no_probe()
{
    return [](const std::vector<std::string>&, const std::vector<fs::path>&) { return std::vector<fs::path>{}; };
}

ResolvedTool sockets_10()
{
    ResolvedTool rt;
    rt.name = "sockets";
    rt.version = "1.0";
    return rt;
}

SiteInfo boost_site()
{
    return SiteInfo::parse("tool.boost.BOOST_BASE = /opt/boost\n"
                           "tool.boost.LIBDIR = /opt/boost/lib\n"
                           "tool.boost.INCLUDE = /opt/boost/include\n");
}

} // namespace

TEST(ToolDoc, BoostFixtureStructure)
{
    const auto spec = boost();
    EXPECT_EQ(spec.name, "boost");
    EXPECT_EQ(spec.display_name, "Boost");
    ASSERT_EQ(spec.blocks.size(), 3u);
    const std::vector<std::string> versions{"1.28.0", "1.29.0", "1.30.0"};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& b = spec.blocks[i];
        EXPECT_EQ(b.version, versions[i]);
        EXPECT_EQ(b.info_url, "http://www.boost.org");
        EXPECT_EQ(b.libs, std::vector<std::string>{"boost_thread"});
        ASSERT_EQ(b.client_vars.size(), 3u);
        EXPECT_EQ(b.client_vars[0].name, "BOOST_BASE");
        EXPECT_EQ(b.client_vars[0].type, VarType::Plain);
        EXPECT_EQ(b.client_vars[0].description, "The top of the Boost distribution.");
        EXPECT_EQ(b.client_vars[1].name, "LIBDIR");
        EXPECT_EQ(b.client_vars[1].type, VarType::Lib);
        EXPECT_EQ(b.client_vars[2].name, "INCLUDE");
        EXPECT_EQ(b.client_vars[2].type, VarType::Plain);
        for (const auto& v : b.client_vars) {
            EXPECT_TRUE(v.client);
            EXPECT_FALSE(v.value);
        }
        ASSERT_EQ(b.derived_vars.size(), 1u);
        EXPECT_EQ(b.derived_vars[0].name, "LD_LIBRARY_PATH");
        EXPECT_EQ(b.derived_vars[0].type, VarType::RuntimePath);
        EXPECT_EQ(b.derived_vars[0].value, "$LIBDIR");
        EXPECT_FALSE(b.derived_vars[0].client);
        ASSERT_EQ(b.externals.size(), 1u);
        EXPECT_EQ(b.externals[0].ref, "sockets");
        EXPECT_EQ(b.externals[0].version, "1.0");
        EXPECT_EQ(b.externals[0].description, "We need the sockets libs");
    }
}

TEST(ToolDoc, ParseErrors)
{
    const std::string h = "<doc type=BuildSystem::ToolDoc version=1.0>";
    EXPECT_THROW(parse_text(h), ParseError);
    EXPECT_THROW(parse_text(h + "<Environment name=A value=1>"), ParseError);
    EXPECT_THROW(parse_text(h + "<Tool name=A version=1><Environment name=X value=1><Environment name=X value=2>"),
                 ParseError);
    EXPECT_THROW(parse_text(h + "<Tool name=A version=1><Client><Environment name=X value=1></Client>"), ParseError);
    EXPECT_THROW(parse_text(h + "<Tool name=A version=1><Tool name=B version=2>"), ParseError);
    EXPECT_THROW(parse_text(h + "<Tool name=A version=1><Tool name=A version=1>"), ParseError);
    EXPECT_THROW(parse_text(h + "<Tool name=A version=1><External ref=a version=1>"), ParseError);
    EXPECT_THROW(parse_text(h + "<Tool name=A version=1><Environment name=X value=1 type=weird>"), ParseError);
}

TEST(ToolDoc, SelectVersionListsAvailable)
{
    const auto spec = boost();
    EXPECT_EQ(select_version(spec, "1.29.0").version, "1.29.0");
    try {
        select_version(spec, "2.0");
        FAIL();
    } catch (const ResolutionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("1.28.0, 1.29.0, 1.30.0"), std::string::npos) << msg;
    }
}

TEST(Resolve, BoostFromSiteFile)
{
    const auto spec = boost();
    const auto rt = resolve_tool("Boost", select_version(spec, "1.28.0"), boost_site(), no_probe(), {},
                                 {{"sockets", sockets_10()}});
    EXPECT_EQ(rt.name, "boost");
    EXPECT_EQ(rt.version, "1.28.0");
    ASSERT_EQ(rt.bindings.size(), 4u);
    EXPECT_EQ(rt.binding("BOOST_BASE")->value, "/opt/boost");
    EXPECT_EQ(rt.binding("BOOST_BASE")->provenance, Provenance::SiteFile);
    EXPECT_EQ(rt.binding("LD_LIBRARY_PATH")->value, "/opt/boost/lib");
    EXPECT_EQ(rt.binding("LD_LIBRARY_PATH")->provenance, Provenance::Substitution);
    EXPECT_EQ(rt.runtime_entries,
              (std::vector<std::pair<std::string, std::string>>{{"LD_LIBRARY_PATH", "/opt/boost/lib"}}));
    EXPECT_EQ(rt.descriptions.at("BOOST_BASE"), "The top of the Boost distribution.");
}

TEST(Resolve, NoClientVarsNoExternals)
{
    const auto spec = parse_text("<doc type=BuildSystem::ToolDoc version=1.0><Tool name=T version=1>"
                                 "<Environment name=A value=x><Environment name=B value=$A/y>");
    const auto rt = resolve_tool("T", spec.blocks[0], SiteInfo{}, no_probe(), {}, {});
    ASSERT_EQ(rt.bindings.size(), 2u);
    EXPECT_EQ(rt.bindings[1].value, "x/y");
    EXPECT_TRUE(rt.runtime_entries.empty());
}

TEST(Resolve, ProbeFindsLibraryDirectory)
{
    ts::TempDir tmp;
    ts::write_text(tmp / "roots" / "other" / "README", "");
    ts::write_text(tmp / "roots" / "boost" / "lib" / "libboost_thread.so.1.28.0", "");
    auto site = SiteInfo::parse("tool.boost.BOOST_BASE = /b\ntool.boost.INCLUDE = /b/include\n");
    site.set("search.libroots", (tmp / "roots").string());
    const auto spec = boost();
    const auto rt = resolve_tool("boost", spec.blocks[0], site, filesystem_prober(), {}, {{"sockets", sockets_10()}});
    EXPECT_EQ(rt.binding("LIBDIR")->value, (tmp / "roots" / "boost" / "lib").string());
    EXPECT_EQ(rt.binding("LIBDIR")->provenance, Provenance::Probe);
    EXPECT_EQ(rt.binding("LD_LIBRARY_PATH")->value, (tmp / "roots" / "boost" / "lib").string());
}

TEST(Resolve, UntypedClientVarIsNeverProbed)
{
    ts::TempDir tmp;
    ts::write_text(tmp / "lib" / "libboost_thread.a", "");
    auto site = SiteInfo::parse("tool.boost.BOOST_BASE = /b\n");
    site.set("search.libroots", tmp.path().string());
    int prompts = 0;
    PromptCallback prompt = [&](const PromptRequest& req) -> std::optional<std::string> {
        ++prompts;
        EXPECT_EQ(req.variable, "INCLUDE");
        return "/typed/in";
    };
    const auto rt = resolve_tool("boost", boost().blocks[0], site, filesystem_prober(), prompt,
                                 {{"sockets", sockets_10()}});
    EXPECT_EQ(prompts, 1);
    EXPECT_EQ(rt.binding("INCLUDE")->provenance, Provenance::Prompt);
    EXPECT_EQ(rt.binding("LIBDIR")->provenance, Provenance::Probe);
}

TEST(Resolve, UnresolvableVariableEchoesHint)
{
    try {
        resolve_tool("boost", boost().blocks[0], SiteInfo{}, no_probe(), {}, {{"sockets", sockets_10()}});
        FAIL();
    } catch (const ResolutionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("BOOST_BASE"), std::string::npos) << msg;
        EXPECT_NE(msg.find("boost"), std::string::npos) << msg;
        EXPECT_NE(msg.find("The top of the Boost distribution."), std::string::npos) << msg;
    }
}

TEST(Resolve, MissingOrMismatchedExternal)
{
    EXPECT_THROW(resolve_tool("boost", boost().blocks[0], boost_site(), no_probe(), {}, {}), ResolutionError);
    auto old = sockets_10();
    old.version = "0.9";
    try {
        resolve_tool("boost", boost().blocks[0], boost_site(), no_probe(), {}, {{"sockets", old}});
        FAIL();
    } catch (const ResolutionError& e) {
        EXPECT_NE(std::string(e.what()).find("1.0"), std::string::npos);
    }
}

TEST(Resolve, UndefinedReference)
{
    const auto spec = parse_text("<doc type=BuildSystem::ToolDoc version=1.0><Tool name=T version=1>"
                                 "<Environment name=B value=$NOPE>");
    EXPECT_THROW(resolve_tool("T", spec.blocks[0], SiteInfo{}, no_probe(), {}, {}), ResolutionError);
}

TEST(Resolve, ExternalBindingsAreVisibleToDerivedVars)
{
    const auto spec = parse_text("<doc type=BuildSystem::ToolDoc version=1.0><Tool name=T version=1>"
                                 "<External ref=base version=2><Environment name=P value=${ROOT}/bin "
                                 "type=Runtime_path>");
    ResolvedTool base;
    base.name = "base";
    base.version = "2";
    base.bindings.push_back({"ROOT", "/r", Provenance::SiteFile, VarType::Plain});
    const auto rt = resolve_tool("T", spec.blocks[0], SiteInfo{}, no_probe(), {}, {{"base", base}});
    EXPECT_EQ(rt.runtime_entries.front().second, "/r/bin");
}

TEST(Resolve, DeterministicWithoutPrompt)
{
    const auto spec = boost();
    const auto a = resolve_tool("boost", spec.blocks[1], boost_site(), no_probe(), {}, {{"sockets", sockets_10()}});
    const auto b = resolve_tool("boost", spec.blocks[1], boost_site(), no_probe(), {}, {{"sockets", sockets_10()}});
    EXPECT_EQ(to_record(a), to_record(b));
}

TEST(Resolve, RecordRoundTrip)
{
    const auto rt = resolve_tool("boost", boost().blocks[0], boost_site(), no_probe(), {}, {{"sockets", sockets_10()}});
    const auto back = from_record(to_record(rt));
    EXPECT_EQ(to_record(back), to_record(rt));
    EXPECT_TRUE(back.same_resolution(rt));
    EXPECT_EQ(back.externals, rt.externals);
}

TEST(Resolve, RuntimeContributionPrependsInOrder)
{
    ResolvedTool rt;
    rt.runtime_entries = {{"PATH", "/a"}, {"LD_LIBRARY_PATH", "/b"}};
    const auto d = runtime_contribution(rt);
    ASSERT_EQ(d.prepends.size(), 2u);
    EXPECT_EQ(d.prepends[0], (Prepend{"PATH", "/a", Prepend::Anchor::Absolute}));
}

TEST(DependencyOrder, ExternalsFirstAndCycles)
{
    const auto boost_spec = boost();
    ToolVersionBlock sockets;
    sockets.version = "1.0";
    const auto order = dependency_order({{"Boost", &boost_spec.blocks[0]}, {"sockets", &sockets}});
    EXPECT_EQ(order, (std::vector<std::string>{"sockets", "boost"}));

    ToolVersionBlock a, b;
    a.externals.push_back({"b", "1", ""});
    b.externals.push_back({"a", "1", ""});
    EXPECT_THROW(dependency_order({{"a", &a}, {"b", &b}}), ResolutionError);
}
