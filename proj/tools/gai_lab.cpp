#include <iostream>

#include <CLI11.hpp>

#include "gai/cli/commands.hpp"

#ifndef GAI_CORPUS_DIR
#define GAI_CORPUS_DIR "corpus"
#endif

using namespace gai;

int main(int argc, char **argv) {
  CLI::App app{"gai-lab: allocator-independence experiments"};
  app.require_subcommand(1);

  // run
  cli::RunSpec run;
  auto *c_run = app.add_subcommand("run", "Run a .ntc program under one allocator");
  c_run->add_option("program", run.program)->required();
  c_run->add_option("--alloc", run.alloc, "Allocator selection string")->capture_default_str();
  c_run->add_option("--fuel", run.fuel)->capture_default_str();
  c_run->add_option("--base", run.base, "First environment address")->capture_default_str();
  c_run->add_option("--init", run.init, "Initial variable value, var=val");
  c_run->add_option("--trace-out", run.trace_out, "Write the trace (one JSON event per line)");
  c_run->add_flag("--json", run.json);

  // similar
  std::string sim_a, sim_b;
  bool sim_json = false;
  auto *c_sim = app.add_subcommand("similar", "Decide similarity of two trace files");
  c_sim->add_option("trace1", sim_a)->required();
  c_sim->add_option("trace2", sim_b)->required();
  c_sim->add_flag("--json", sim_json);

  // filter
  std::string f_trace, f_sigma;
  bool f_tail = false, f_json = false;
  auto *c_filter = app.add_subcommand("filter", "Filter a trace by a symbolic sequence");
  c_filter->add_option("trace", f_trace)->required();
  c_filter->add_option("--sigma", f_sigma, "e.g. \"M8 . F0 . F0\"")->required();
  c_filter->add_flag("--allow-tail", f_tail, "Accept an unconsumed suffix of sigma");
  c_filter->add_flag("--json", f_json);

  // gai
  cli::GaiSpec g;
  bool g_skip_wf = false;
  auto *c_gai = app.add_subcommand("gai", "Check a .ntc program over an allocator family");
  c_gai->add_option("program", g.program)->required();
  c_gai->add_option("--family", g.family, "';'-separated allocator strings")->capture_default_str();
  c_gai->add_option("--fuel", g.fuel)->capture_default_str();
  c_gai->add_option("--base", g.base)->capture_default_str();
  c_gai->add_option("--init", g.init, "Initial variable value, var=val");
  c_gai->add_option("--seed", g.opt.wf_seed, "Seed for the well-formedness precondition")->capture_default_str();
  c_gai->add_option("--wf-trials", g.opt.wf_trials)->capture_default_str();
  c_gai->add_flag("--skip-wf", g_skip_wf, "Skip the well-formedness precondition");
  c_gai->add_flag("--json", g.json);

  // wf
  cli::WfSpec wf;
  auto *c_wf = app.add_subcommand("wf", "Randomized well-formedness check of an allocator");
  c_wf->add_option("--alloc", wf.alloc)->capture_default_str();
  c_wf->add_option("--trials", wf.trials)->capture_default_str();
  c_wf->add_option("--seed", wf.seed)->capture_default_str();
  c_wf->add_option("--max-len", wf.max_len)->capture_default_str();
  c_wf->add_option("--base", wf.base, "Start of the reserved cells")->capture_default_str();
  c_wf->add_option("--reserved", wf.reserved, "Number of reserved cells")->capture_default_str();
  c_wf->add_flag("--json", wf.json);

  // ms-run
  std::string ms_file;
  std::vector<std::string> ms_init;
  std::uint64_t ms_fuel = memsafe::kDefaultMsFuel;
  bool ms_json = false;
  auto *c_ms = app.add_subcommand("ms-run", "Evaluate a .ms program");
  c_ms->add_option("program", ms_file)->required();
  c_ms->add_option("--init", ms_init);
  c_ms->add_option("--fuel", ms_fuel)->capture_default_str();
  c_ms->add_flag("--json", ms_json);

  // translate
  cli::TranslateSpec tr;
  auto *c_tr = app.add_subcommand("translate", "Translate a .ms program to .ntc");
  c_tr->add_option("program", tr.program)->required();
  c_tr->add_option("-o,--output", tr.output);
  c_tr->add_flag("--check", tr.check, "Also run the differential check");
  c_tr->add_option("--family", tr.family)->capture_default_str();
  c_tr->add_option("--init", tr.init);
  c_tr->add_option("--fuel", tr.fuel)->capture_default_str();

  // corpus
  cli::CorpusSpec cs;
  cs.dir = GAI_CORPUS_DIR;
  bool no_times = false;
  auto *c_corpus = app.add_subcommand("corpus", "Check every corpus case against its expected verdict");
  c_corpus->add_option("--corpus-dir", cs.dir)->capture_default_str();
  c_corpus->add_option("--family", cs.family)->capture_default_str();
  c_corpus->add_option("--fuel", cs.fuel)->capture_default_str();
  c_corpus->add_flag("--memsafe", cs.memsafe, "Run the Memsafe translation suite instead");
  c_corpus->add_flag("--no-times", no_times, "Omit timings");
  c_corpus->add_flag("--json", cs.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitError;
  }

  try {
    if (*c_run)
      return cli::cmd_run(run, std::cout);
    if (*c_sim)
      return cli::cmd_similar(sim_a, sim_b, sim_json, std::cout);
    if (*c_filter)
      return cli::cmd_filter(f_trace, f_sigma, f_tail, f_json, std::cout);
    if (*c_gai) {
      g.opt.check_precondition = !g_skip_wf;
      return cli::cmd_gai(g, std::cout);
    }
    if (*c_wf)
      return cli::cmd_wf(wf, std::cout);
    if (*c_ms)
      return cli::cmd_ms_run(ms_file, ms_init, ms_fuel, ms_json, std::cout);
    if (*c_tr)
      return cli::cmd_translate(tr, std::cout);
    if (*c_corpus) {
      cs.timings = !no_times;
      return cli::cmd_corpus(cs, std::cout);
    }
  } catch (const std::exception &e) {
    std::cerr << "gai-lab: " << e.what() << '\n';
    return cli::kExitError;
  }
  return cli::kExitError;
}
