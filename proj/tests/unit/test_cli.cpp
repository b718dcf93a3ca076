// Drives the installed command-line tool end to end.

#include "json.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path data_dir = MMPART_DATA_DIR;

struct Outcome {
    int status = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / "mmpart_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome mmpart_cli(const std::string& args)
{
    auto out = scratch("stdout.txt");
    auto err = scratch("stderr.txt");
    std::string cmd = std::string("\"") + MMPART_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    int raw = std::system(cmd.c_str());
    Outcome o;
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
}

fs::path write_json(const std::string& name, const json& doc)
{
    auto p = scratch(name);
    std::ofstream(p) << doc.dump(2);
    return p;
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::string arg(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("analyze-offline on the case study passes and writes a report")
{
    auto report = scratch("offline.json");
    auto o = mmpart_cli("analyze-offline " + arg(data_dir / "case_study.json") + " --report " + arg(report));
    CHECK(o.status == 0);
    CHECK(o.out.find("optimal transition latency bound L = 40") != std::string::npos);
    auto doc = load(report);
    CHECK(doc["modes"][0]["platform_bound"]["exact"] == "40");
    CHECK(doc["modes"][1]["platform_bound"]["exact"] == "85");
    CHECK(doc["modes"][1]["allocation"]["t10"] == 2);
    CHECK(doc["pass"] == true);

    auto again = scratch("offline_again.json");
    CHECK(mmpart_cli("analyze-offline " + arg(data_dir / "case_study.json") + " --report " + arg(again)).status == 0);
    CHECK(slurp(report) == slurp(again));
}

TEST_CASE("analyze-offline fails when the mode-2 deadline drops to 139")
{
    auto doc = load(data_dir / "case_study.json");
    doc["tasks"][9]["transition_deadline"] = 139;
    auto o = mmpart_cli("analyze-offline " + arg(write_json("d139.json", doc)));
    CHECK(o.status == 1);
    CHECK(o.out.find("Global verdict: FAIL") != std::string::npos);
}

TEST_CASE("analyze-online on the case study and at the deadline boundary")
{
    auto report = scratch("online.json");
    auto o = mmpart_cli("analyze-online " + arg(data_dir / "case_study.json") + " --report " + arg(report));
    CHECK(o.status == 0);
    auto doc = load(report);
    CHECK(doc["modes"][0]["exit_latency_bound"]["bound"]["exact"] == "50");
    CHECK(doc["modes"][1]["exit_latency_bound"]["bound"]["exact"] == "85");

    auto tight = load(data_dir / "case_study.json");
    tight["tasks"][9]["transition_deadline"] = 149;
    CHECK(mmpart_cli("analyze-online " + arg(write_json("d149.json", tight))).status == 1);
    CHECK(mmpart_cli("analyze-offline " + arg(write_json("d149.json", tight))).status == 0);
}

TEST_CASE("online certification can fail where the offline analysis passes")
{
    json doc = {{"processors", 2},
                {"tasks",
                 {{{"id", "a"}, {"kind", "MD"}, {"wcet", 11}, {"period", 20}},
                  {{"id", "b"}, {"kind", "MD"}, {"wcet", 11}, {"period", 20}},
                  {{"id", "c"}, {"kind", "MD"}, {"wcet", 9}, {"period", 20}},
                  {{"id", "d"}, {"kind", "MD"}, {"wcet", 9}, {"period", 20}}}},
                {"modes", {{{"id", "only"}, {"md_tasks", {"a", "b", "c", "d"}}}}}};
    auto path = write_json("lopez_fail.json", doc);
    CHECK(mmpart_cli("analyze-online " + arg(path)).status == 1);
    CHECK(mmpart_cli("analyze-offline " + arg(path)).status == 0);
}

TEST_CASE("single-mode and empty-mode files")
{
    json single = {{"processors", 1},
                   {"tasks", {{{"id", "a"}, {"kind", "MD"}, {"wcet", 1}, {"period", 4}}}},
                   {"modes", {{{"id", "only"}, {"md_tasks", {"a"}}}}}};
    auto report = scratch("single.json");
    CHECK(mmpart_cli("analyze-offline " + arg(write_json("single_sys.json", single)) + " --report " + arg(report))
              .status
          == 0);
    CHECK(load(report)["modes"][0]["entry_latency"]["exact"] == "0");

    json empty = {{"processors", 2},
                  {"tasks", {{{"id", "m"}, {"kind", "MI"}, {"wcet", 1}, {"period", 2}, {"processor", 1}},
                             {{"id", "a"}, {"kind", "MD"}, {"wcet", 1}, {"period", 4}}}},
                  {"modes", {{{"id", "run"}, {"md_tasks", {"a"}}}, {{"id", "idle"}, {"md_tasks", json::array()}}}},
                  {"transitions", json::array({json::array({"run", "idle"}), json::array({"idle", "run"})})}};
    CHECK(mmpart_cli("analyze-online " + arg(write_json("empty_mode.json", empty))).status == 0);
}

TEST_CASE("simulate replays the two-mode example")
{
    auto trace = scratch("fig2.tsv");
    auto o = mmpart_cli("simulate " + arg(data_dir / "table1.json") + " " + arg(data_dir / "fig2_scenario.json")
                        + " --trace " + arg(trace));
    CHECK(o.status == 0);
    auto text = slurp(trace);
    CHECK(text.find("# latency\told->new\tmcr 7\t4\n") != std::string::npos);
    CHECK(text.find("# deadline-misses\t0\n") != std::string::npos);
    CHECK(o.out.find("observed latency after MCR at 7: 4") != std::string::npos);
}

TEST_CASE("simulate with a sweep prints the maximum latency")
{
    json sweep = {{"initial_mode", "old"},
                  {"horizon", 1},
                  {"allocation", "offline-table"},
                  {"sweep", {{"from_mode", "old"}, {"to_mode", "new"}, {"step", 1}}}};
    auto o = mmpart_cli("simulate " + arg(data_dir / "table1.json") + " " + arg(write_json("sweep.json", sweep)));
    CHECK(o.status == 0);
    CHECK(o.out.find("max-latency") != std::string::npos);
    CHECK(o.out.find("15 runs") != std::string::npos);
}

TEST_CASE("simulate with horizon 0 succeeds with an empty trace")
{
    json sc = {{"initial_mode", "old"}, {"horizon", 0}};
    auto o = mmpart_cli("simulate " + arg(data_dir / "table1.json") + " " + arg(write_json("h0.json", sc)));
    CHECK(o.status == 0);
    CHECK(o.out.rfind("# time\tprocessor\tkind\ttask\tjob\n# deadline-misses\t0\n", 0) == 0);
}

TEST_CASE("simulate exits 1 on a missed deadline and 2 on a nested request")
{
    auto sys = load(data_dir / "table1.json");
    sys["tasks"][4]["transition_deadline"] = 7;
    auto miss = mmpart_cli("simulate " + arg(write_json("t1_d7.json", sys)) + " " + arg(data_dir / "fig2_scenario.json"));
    CHECK(miss.status == 1);

    auto cs = data_dir / "case_study.json";
    json nested = {{"initial_mode", "1"}, {"horizon", 200}, {"mcrs", {{{"time", 0}, {"to", "2"}}, {{"time", 1}, {"to", "1"}}}}};
    auto o = mmpart_cli("simulate " + arg(cs) + " " + arg(write_json("nested.json", nested)));
    CHECK(o.status == 2);
    CHECK(o.err.find("error") != std::string::npos);
}

TEST_CASE("export-milp writes the program and rejects unknown modes")
{
    auto lp = scratch("mode1.lp");
    auto o = mmpart_cli("export-milp " + arg(data_dir / "case_study.json") + " --mode 1 -o " + arg(lp));
    CHECK(o.status == 0);
    CHECK(slurp(lp).find("Subject To") != std::string::npos);
    CHECK(mmpart_cli("export-milp " + arg(data_dir / "case_study.json") + " --mode 9 -o " + arg(lp)).status == 2);
    CHECK(mmpart_cli("export-milp " + arg(data_dir / "case_study.json") + " --mode 1 --hv 50 -o " + arg(lp)).status
          == 2);
    CHECK(mmpart_cli("export-milp " + arg(data_dir / "case_study.json") + " --mode 1 --hv 1000 -o " + arg(lp)).status
          == 0);
}

TEST_CASE("input errors exit with status 2")
{
    CHECK(mmpart_cli("analyze-offline /nonexistent.json").status == 2);
    CHECK(mmpart_cli("frobnicate").status == 2);
    CHECK(mmpart_cli("").status == 2);
    auto broken = scratch("broken.json");
    std::ofstream(broken) << "{ \"processors\": 2,\n \"tasks\": [ }";
    auto o = mmpart_cli("analyze-online " + arg(broken));
    CHECK(o.status == 2);
    CHECK(o.err.find(":2:") != std::string::npos);
    auto doc = load(data_dir / "case_study.json");
    doc["tasks"][0]["wcet"] = 10.5;
    CHECK(mmpart_cli("analyze-offline " + arg(write_json("float.json", doc))).status == 2);
}
