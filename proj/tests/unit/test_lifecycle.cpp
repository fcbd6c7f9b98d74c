#include "scram/area.hpp"
#include "scram/cli.hpp"
#include "scram/runtime_env.hpp"

#include "shell_sim.hpp"
#include "toy.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

namespace ts = scram::testsupport;
namespace fs = std::filesystem;

using scram::testsupport::CliResult;
using scram::testsupport::ToyWorld;

namespace {

::testing::AssertionResult ok(const CliResult& r)
{
    if (r.status == 0)
        return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "status " << r.status << "\nout: " << r.out << "\nerr: " << r.err;
}

// Bootstrap, build and install the toy project; returns the central root.
fs::path installed(const ToyWorld& w)
{
    auto r = w.run({"bootstrap", w.bootstrap_file().string()}, w.install_root());
    EXPECT_TRUE(ok(r));
    r = w.run({"build"}, w.central());
    EXPECT_TRUE(ok(r));
    r = w.run({"install"}, w.central());
    EXPECT_TRUE(ok(r));
    return w.central();
}

} // namespace

TEST(Cli, VersionAndUsage)
{
    ToyWorld w;
    auto r = w.run({"--version"}, w.root());
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out, "scram 1.0.0\n");
    EXPECT_EQ(w.run({}, w.root()).status, 2);
    EXPECT_EQ(w.run({"frobnicate"}, w.root()).status, 2);
    r = w.run({"runtime"}, w.root());
    EXPECT_EQ(r.status, 2);
    r = w.run({"runtime", "-sh"}, w.root());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("scram: runtime: not in a SCRAM area"), std::string::npos) << r.err;
}

TEST(Lifecycle, BootstrapCreatesArea)
{
    ToyWorld w;
    const auto r = w.run({"bootstrap", w.bootstrap_file().string()}, w.install_root());
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(r.out, "Created TOY 1_0 at " + w.central().string() + " (4 tools resolved)\n");
    EXPECT_EQ(ts::read_text(w.central() / "README"), "Toy project used by the test suite.\n");
    EXPECT_TRUE(fs::exists(w.central() / "src" / "hello" / "hello.cpp"));
    const auto area = scram::ProjectArea::open(w.central());
    EXPECT_EQ(area.state(), "incomplete");
    const auto arch = scram::config::parse_architecture("Linux__2.4");
    const auto boost = area.active_tool(arch, "boost");
    ASSERT_TRUE(boost);
    EXPECT_EQ(boost->binding("LIBDIR")->value, (w.libroot() / "boost-1.28.0" / "lib").string());
    EXPECT_EQ(area.active_tool(arch, "htl")->version, "1.4");
    EXPECT_FALSE(area.active_tool(arch, "CC"));

    const auto again = w.run({"bootstrap", w.bootstrap_file().string()}, w.install_root());
    EXPECT_EQ(again.status, 1);
    EXPECT_NE(again.err.find("already exists"), std::string::npos);
}

TEST(Lifecycle, InstallNeedsCompleteArea)
{
    ToyWorld w;
    ASSERT_TRUE(ok(w.run({"bootstrap", w.bootstrap_file().string()}, w.install_root())));
    auto r = w.run({"install"}, w.central());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("incomplete"), std::string::npos) << r.err;

    r = w.run({"build", "all"}, w.central(), {{"TOY_BUILD_STATUS", "3"}});
    EXPECT_EQ(r.status, 3);
    EXPECT_EQ(scram::ProjectArea::open(w.central()).state(), "incomplete");

    r = w.run({"build", "-j", "4", "all"}, w.central());
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(ts::read_text(w.central() / "logs" / "build-args"), "-j\n4\nall\n");
    EXPECT_NE(ts::read_text(w.central() / "logs" / "build-ldpath").find("boost-1.28.0/lib"), std::string::npos);

    r = w.run({"install"}, w.central());
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(r.out, "Installed TOY 1_0 for Linux__2.4 at " + w.central().string() + "\n");
    EXPECT_TRUE(ok(w.run({"install"}, w.central())));
}

TEST(Lifecycle, ForceInstallSkipsBuild)
{
    ToyWorld w;
    ASSERT_TRUE(ok(w.run({"bootstrap", w.bootstrap_file().string()}, w.install_root())));
    ASSERT_TRUE(ok(w.run({"install", "--force"}, w.central())));
    EXPECT_EQ(scram::ProjectArea::open(w.central()).state(), "complete");
}

TEST(Lifecycle, DeveloperAreaAndLocalOverride)
{
    ToyWorld w;
    installed(w);

    auto r = w.run({"list"}, w.root());
    ASSERT_TRUE(ok(r));
    EXPECT_NE(r.out.find("TOY 1_0 --> " + w.central().string() + "\n"), std::string::npos) << r.out;

    r = w.run({"project", "TOY", "2_0"}, w.root());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("1_0"), std::string::npos) << r.err;

    r = w.run({"project", "TOY", "1_0"}, w.root());
    ASSERT_TRUE(ok(r));
    const auto dev = w.root() / "TOY_1_0";
    EXPECT_EQ(r.out, "Created developer area " + dev.string() + " linked to " + w.central().string() + "\n");

    r = w.run({"tool", "list"}, dev / "src");
    ASSERT_TRUE(ok(r));
    const std::string header = "\nTool list for location " + w.central().string() + "\n" + std::string(50, '+') + "\n";
    EXPECT_EQ(r.out, header + " gcc                  2.95.2     (default=2.95.2)\n"
                              " sockets              1.0        (default=1.0)\n"
                              " boost                1.28.0     (default=1.28.0)\n"
                              " htl                  1.4        (default=1.4)\n");

    const auto htl_url = "cvs://toyrepo/repo?module=tools/htl.xml&version=TOY_2";
    r = w.run({"setup", "htl", "1.5", htl_url}, dev);
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(r.out, "htl 1.5: set up in " + dev.string() + "\n");
    r = w.run({"tool", "list"}, dev);
    EXPECT_NE(r.out.find(" htl                  1.5        (default=1.4)\n"), std::string::npos) << r.out;
    r = w.run({"tool", "list"}, w.central());
    EXPECT_NE(r.out.find(" htl                  1.4        (default=1.4)\n"), std::string::npos) << r.out;

    r = w.run({"setup", "htl", "1.5", htl_url}, dev);
    ASSERT_TRUE(ok(r));
    r = w.run({"setup"}, dev);
    ASSERT_TRUE(ok(r));
    EXPECT_NE(r.out.find("boost 1.28.0: unchanged in " + dev.string()), std::string::npos) << r.out;

    r = w.run({"runtime", "-sh"}, dev / "src", {{"PWD", (dev / "src").string()}});
    ASSERT_TRUE(ok(r));
    const auto ld = (w.libroot() / "boost-1.28.0" / "lib").string();
    EXPECT_NE(r.out.find(ld), std::string::npos) << r.out;
    const auto env = ts::eval_sh(r.out, w.env(dev / "src"));
    EXPECT_EQ(env.at("LD_LIBRARY_PATH"),
              (dev / "src").string() + "/../lib:" + w.central().string() + "/lib:/opt/htl/1.5/lib:" + ld
                  + ":/usr/lib");
    EXPECT_EQ(env.at("PATH"), (dev / "src").string() + "/../bin:" + w.central().string()
                                  + "/bin:/opt/gcc-2.95.2/bin:/usr/bin:/bin");
}

TEST(Lifecycle, ToolInfoShowsSpecification)
{
    ToyWorld w;
    installed(w);
    const auto r = w.run({"tool", "info", "Boost"}, w.central());
    ASSERT_TRUE(ok(r));
    EXPECT_NE(r.out.find("Tool: boost\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Version: 1.28.0\n"), std::string::npos);
    EXPECT_NE(r.out.find("  BOOST_BASE=/opt/boost [plain, site-file]\n    The top of the Boost distribution.\n"),
              std::string::npos)
        << r.out;
    EXPECT_NE(r.out.find("  sockets 1.0\n    We need the sockets libs\n"), std::string::npos) << r.out;
    const auto bad = w.run({"tool", "info", "nosuch"}, w.central());
    EXPECT_EQ(bad.status, 1);
    EXPECT_NE(bad.err.find("htl"), std::string::npos);
}

TEST(Lifecycle, ReadOnlyCommandsLeaveTreeUntouched)
{
    ToyWorld w;
    installed(w);
    ASSERT_TRUE(ok(w.run({"project", "TOY", "1_0"}, w.root())));
    const auto before = ts::snapshot_tree(w.root());
    const auto dev = w.root() / "TOY_1_0";
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"list"}, {"list", "TOY"}, {"tool", "list"}, {"tool", "info", "htl"}, {"runtime", "-csh"},
             {"runtime", "-sh", "--app", "debug"}}) {
        EXPECT_TRUE(ok(w.run(args, dev)));
    }
    EXPECT_EQ(ts::snapshot_tree(w.root()), before);
}

TEST(Lifecycle, AppEnvironmentOverlay)
{
    ToyWorld w;
    installed(w);
    auto r = w.run({"runtime", "-csh", "--app", "debug"}, w.central());
    ASSERT_TRUE(ok(r));
    const auto env = ts::eval_csh(r.out, w.env(w.central()));
    EXPECT_EQ(env.at("TOY_DEBUG"), "1");
    EXPECT_TRUE(env.at("PATH").starts_with("/opt/debug-tools/bin:"));
    r = w.run({"runtime", "-csh", "--app", "nosuch"}, w.central());
    EXPECT_EQ(r.status, 1);
}

TEST(Lifecycle, RenamedDeveloperAreaGivesIdenticalOutput)
{
    ToyWorld w;
    installed(w);
    ASSERT_TRUE(ok(w.run({"project", "TOY", "1_0"}, w.root())));
    auto outputs = [&](const fs::path& dev) {
        std::vector<std::string> out;
        for (const auto& args : std::vector<std::vector<std::string>>{
                 {"tool", "list"}, {"runtime", "-sh"}, {"runtime", "-csh"}}) {
            const auto r = w.run(args, dev / "src", {{"PWD", (dev / "src").string()}});
            EXPECT_TRUE(ok(r));
            out.push_back(r.out);
        }
        return out;
    };
    const auto before = outputs(w.root() / "TOY_1_0");
    fs::rename(w.root() / "TOY_1_0", w.root() / "renamed");
    EXPECT_EQ(outputs(w.root() / "renamed"), before);
}

TEST(Lifecycle, SetupByNameRevertsToConfiguredVersion)
{
    ToyWorld w;
    installed(w);
    ASSERT_TRUE(ok(w.run({"project", "TOY", "1_0"}, w.root())));
    const auto dev = w.root() / "TOY_1_0";
    ASSERT_TRUE(ok(w.run({"setup", "htl", "1.5", "cvs://toyrepo/repo?module=tools/htl.xml"}, dev)));
    auto r = w.run({"setup"}, dev);
    EXPECT_NE(r.out.find("htl 1.5: unchanged in "), std::string::npos) << r.out;
    r = w.run({"setup", "htl"}, dev);
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(r.out, "htl 1.4: set up in " + dev.string() + "\n");
    r = w.run({"setup", "nosuch"}, dev);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("known tools"), std::string::npos) << r.err;
    r = w.run({"setup", "htl", "9.9"}, dev);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("1.4, 1.5"), std::string::npos) << r.err;
}

TEST(Lifecycle, DeveloperAreaHoldsOnlyIdentityAndMetadata)
{
    ToyWorld w;
    installed(w);
    ASSERT_TRUE(ok(w.run({"project", "TOY", "1_0"}, w.root())));
    const auto dev = w.root() / "TOY_1_0";
    std::set<std::string> files;
    for (const auto& [rel, content] : ts::snapshot_tree(dev)) {
        if (!rel.ends_with("/"))
            files.insert(rel);
    }
    EXPECT_EQ(files, (std::set<std::string>{".SCRAM/Link", ".SCRAM/area", ".SCRAM/state", "config/identity.json"}));
    EXPECT_EQ(ts::read_text(dev / "config" / "identity.json"), ts::read_text(w.central() / "config" / "identity.json"));

    const auto before = ts::snapshot_tree(dev);
    const auto r = w.run({"setup"}, dev);
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(r.out.find("set up in"), std::string::npos) << r.out;
    auto after = ts::snapshot_tree(dev);
    after.erase(".SCRAM/lock");
    EXPECT_EQ(after, before);
}

TEST(Lifecycle, SetupPicksUpChangedSiteValueLocally)
{
    ToyWorld w;
    installed(w);
    ASSERT_TRUE(ok(w.run({"project", "TOY", "1_0"}, w.root())));
    const auto dev = w.root() / "TOY_1_0";
    const auto central_record = ts::snapshot_tree(w.central() / ".SCRAM");

    auto site = ts::read_text(w.install_root() / "site.cfg");
    ts::write_text(w.install_root() / "site.cfg", site + "tool.boost.LIBDIR = /srv/boost/lib\n");
    const auto r = w.run({"setup", "boost"}, dev);
    ASSERT_TRUE(ok(r));
    EXPECT_EQ(r.out, "boost 1.28.0: set up in " + dev.string() + "\n");

    const auto arch = scram::config::parse_architecture("Linux__2.4");
    const auto local = scram::ProjectArea::open(dev).local_tool(arch, "boost");
    ASSERT_TRUE(local);
    EXPECT_EQ(local->binding("LIBDIR")->value, "/srv/boost/lib");
    EXPECT_EQ(local->binding("LD_LIBRARY_PATH")->value, "/srv/boost/lib");
    EXPECT_EQ(ts::snapshot_tree(w.central() / ".SCRAM"), central_record);
}

TEST(Lifecycle, AlternatingAppOverlaysLeaveOnlyTheLast)
{
    ToyWorld w;
    installed(w);
    ts::write_text(w.central() / "config" / "app-env" / "depth",
                   "<doc type=BuildSystem::AppEnvDoc version=1.0>\n"
                   "<Environment name=DISPLAY_DEPTH value=8>\n"
                   "<Environment name=LD_LIBRARY_PATH value=/opt/depth/lib type=Runtime_path>\n");
    auto env = w.env(w.central());
    const auto base = env;
    auto step = [&](const std::string& app) {
        std::ostringstream out, err;
        const int status = scram::cli::dispatch({{"runtime", "-sh", "--app", app}, env, w.central(), {}}, out, err);
        EXPECT_EQ(status, 0) << err.str();
        env = ts::eval_sh(out.str(), env);
    };
    step("depth");
    EXPECT_EQ(env.at("DISPLAY_DEPTH"), "8");
    EXPECT_TRUE(env.at("LD_LIBRARY_PATH").starts_with("/opt/depth/lib:")) << env.at("LD_LIBRARY_PATH");
    step("debug");
    EXPECT_FALSE(env.contains("DISPLAY_DEPTH"));
    EXPECT_EQ(env.at("LD_LIBRARY_PATH").find("/opt/depth/lib"), std::string::npos);
    EXPECT_EQ(env.at("TOY_DEBUG"), "1");
    const auto after_debug = env;
    step("depth");
    step("debug");
    EXPECT_EQ(env, after_debug);
    EXPECT_EQ(scram::runtime::restore(env), base);
}
