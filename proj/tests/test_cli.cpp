#include <json.hpp>
#include <sstream>

#include "glomdet/annotation.hpp"
#include "glomdet/cli.hpp"
#include "glomdet/detection.hpp"
#include "glomdet/evaluation.hpp"
#include "glomdet/report.hpp"
#include "glomdet/util.hpp"
#include "test_support.hpp"

using namespace glomdet;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_CASE("every subcommand has --help") {
  for (const char* sub : {"convert", "mask", "export", "config", "experiments", "detect", "stitch",
                          "evaluate", "roc", "simulate", "report", "synth"}) {
    CAPTURE(sub);
    const auto r = run_cli({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
}

TEST_CASE("usage errors exit 1") {
  auto r = run_cli({"config", "--bogus"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  r = run_cli({"evaluate", "--ann", "a.json"});
  CHECK(r.code == 1);
}

TEST_CASE("config and experiments print the golden text") {
  test::TempDir dir("cli_cfg");
  auto r = run_cli({"config", "--out", dir.path().string()});
  CHECK(r.code == 0);
  CHECK(r.out == read_text_file(test::golden("training_config.cfg")));
  CHECK(read_text_file(dir / "yolov4-glomeruli.cfg") == r.out);
  CHECK(std::filesystem::exists(dir / "run_manifest.json"));
  CHECK(run_cli({"config", "--classes", "0"}).code == 1);

  r = run_cli({"experiments"});
  CHECK(r.code == 0);
  CHECK(r.out == read_text_file(test::golden("experiments.json")));
}

TEST_CASE("pipeline through the CLI matches library calls") {
  test::TempDir dir("cli_pipe");
  const auto d = dir.path().string();
  REQUIRE(run_cli({"synth", "--slide-id", "s1", "--size", "1024", "--count", "6", "--out", d})
              .code == 0);
  const std::string slide = d + "/s1.tiff", masks = d + "/s1_masks.csv";

  auto r = run_cli({"convert", "--rle", masks, "--slide", slide, "--out", d + "/ann.json"});
  REQUIRE(r.code == 0);
  const auto ann = ann::load_canonical(d + "/ann.json");
  CHECK(ann.boxes.size() == 6);
  CHECK(ann.slide_id == "s1");
  CHECK(std::filesystem::exists(d + "/ann.json.run.json"));

  REQUIRE(run_cli({"mask", "--slide", slide, "--out", d + "/mask"}).code == 0);
  REQUIRE(run_cli({"export", "--slide", slide, "--ann", d + "/ann.json", "--tile-size", "512",
                   "--overlap", "128", "--workers", "2", "--out", d + "/tiles"})
              .code == 0);
  CHECK(std::filesystem::exists(d + "/tiles/patches.csv"));

  REQUIRE(run_cli({"simulate", "--ann", d + "/ann.json", "--slide", slide, "--tile-size", "512",
                   "--overlap", "128", "--out", d + "/sim"})
              .code == 0);
  REQUIRE(run_cli({"stitch", "--raw", d + "/sim/raw_detections.json", "--ann", d + "/ann.json",
                   "--out", d + "/stitched"})
              .code == 0);
  const auto dets = det::load_detections(d + "/stitched/detections.json");
  CHECK(dets.slide_id == "s1");

  r = run_cli({"evaluate", "--ann", d + "/ann.json", "--dets", d + "/stitched/detections.json",
               "--mask-area", "1000000", "--conf", "0.25", "--experiment-id", "2", "--stain",
               "PAS_20", "--out", d + "/eval"});
  REQUIRE(r.code == 0);
  eval::SlideMetrics direct{2, "PAS_20",
                            eval::evaluate_slide(dets.detections, ann.boxes, 1e6, 0.25)};
  direct.report.slide_id = "s1";
  CHECK(read_text_file(d + "/eval/metrics.json") == eval::slide_metrics_to_json(direct));
  CHECK(read_text_file(d + "/eval/metrics.csv") == eval::render_slide_metrics_csv({&direct, 1}));

  REQUIRE(run_cli({"evaluate", "--ann", d + "/ann.json", "--dets",
                   d + "/stitched/detections.json", "--tissue", d + "/mask/tissue.json",
                   "--out", d + "/eval2"})
              .code == 0);

  r = run_cli({"roc", "--ann", d + "/ann.json", "--dets", d + "/stitched/detections.json",
               "--tissue", d + "/mask/tissue.json", "--out", d + "/roc"});
  REQUIRE(r.code == 0);
  CHECK(read_text_file(d + "/roc/roc.csv").rfind("curve,threshold,tpr,fpr\n", 0) == 0);
  CHECK(std::filesystem::exists(d + "/roc/roc.svg"));

  r = run_cli({"report", "--metrics", d + "/eval/metrics.json", "--out", d + "/report"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("PAS_20") != std::string::npos);
  CHECK(read_text_file(d + "/report/report.txt") == r.out);

  const auto manifest = nlohmann::json::parse(read_text_file(d + "/sim/run_manifest.json"));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 0);
  CHECK(manifest["inputs"][0]["fnv1a64"] == file_fingerprint(d + "/ann.json"));
  CHECK(manifest["parameters"]["drop_rate"] == 0.2);
}

TEST_CASE("config file fills flags the command line leaves unset") {
  test::TempDir dir("cli_conf");
  const auto d = dir.path().string();
  ann::SlideAnnotation a{"c", 1000, 1000, {{{0, 0, 100, 100}, 0}}, ann::SourceKind::kBbox};
  ann::save_canonical(a, dir / "ann.json");
  det::DetectionSet set{"c", 1000, 1000, {{{0, 0, 100, 100}, 0.5, 0}}};
  write_text_file(dir / "dets.json", det::to_detections_json(set));
  write_text_file(dir / "run.conf", "# thresholds\nconf = 0.9\nmask_area=250000\nunknown_key=1\n");

  auto r = run_cli({"evaluate", "--config", d + "/run.conf", "--ann", d + "/ann.json", "--dets",
                    d + "/dets.json", "--out", d + "/a"});
  REQUIRE(r.code == 0);
  auto m = eval::slide_metrics_from_json(read_text_file(dir / "a" / "metrics.json"));
  CHECK(m.report.tp == 0);  // 0.5 < 0.9 from the file
  CHECK(m.report.tissue_area == 250000);

  r = run_cli({"evaluate", "--config", d + "/run.conf", "--conf", "0.25", "--ann",
               d + "/ann.json", "--dets", d + "/dets.json", "--out", d + "/b"});
  REQUIRE(r.code == 0);
  m = eval::slide_metrics_from_json(read_text_file(dir / "b" / "metrics.json"));
  CHECK(m.report.tp == 1);  // flag wins

  write_text_file(dir / "bad.conf", "conf\n");
  CHECK(run_cli({"evaluate", "--config", d + "/bad.conf", "--ann", d + "/ann.json", "--dets",
                 d + "/dets.json", "--mask-area", "1", "--out", d + "/c"})
            .code == 1);
}

TEST_CASE("exit codes for I/O and validation failures") {
  test::TempDir dir("cli_err");
  const auto d = dir.path().string();
  auto r = run_cli({"mask", "--slide", d + "/missing.tiff", "--out", d + "/m"});
  CHECK(r.code == 2);
  CHECK(r.err.find("UnreadableFile") != std::string::npos);

  write_text_file(dir / "bad.csv", "id,encoding\nx,1 2 3\n");
  r = run_cli({"convert", "--rle", d + "/bad.csv", "--width", "10", "--height", "10",
               "--slide-id", "x", "--out", d + "/a.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("MalformedRle") != std::string::npos);

  ann::SlideAnnotation a{"c", 100, 100, {}, ann::SourceKind::kBbox};
  ann::save_canonical(a, dir / "ann.json");
  write_text_file(dir / "dets.json", det::to_detections_json({"c", 100, 100, {}}));
  r = run_cli({"evaluate", "--ann", d + "/ann.json", "--dets", d + "/dets.json", "--mask-area",
               "0", "--out", d + "/e"});
  CHECK(r.code == 1);
  CHECK(r.err.find("EmptyTissue") != std::string::npos);

  std::filesystem::create_directories(dir / "tiles");
  r = run_cli({"detect", "--tiles", d + "/tiles", "--detector-command", "exit 4", "--out",
               d + "/det"});
  CHECK(r.code == 2);
  CHECK(r.err.find("DetectorFailed") != std::string::npos);
}

TEST_CASE("detect runs an external command and validates its output") {
  test::TempDir dir("cli_detect");
  const auto d = dir.path().string();
  std::filesystem::create_directories(dir / "tiles");
  write_text_file(dir / "fake.json",
                  R"([{"filename": "s_x0_y0_w512_h512.png", "objects": [{"relative_coordinates":)"
                  R"( {"center_x": 0.5, "center_y": 0.5, "width": 0.1, "height": 0.1},)"
                  R"( "confidence": 0.8}]}])");
  const auto r = run_cli({"detect", "--tiles", d + "/tiles", "--detector-command",
                          "cp " + d + "/fake.json {out_json}", "--out", d + "/det"});
  CHECK(r.code == 0);
  CHECK(det::parse_detector_json(dir / "det" / "raw_detections.json").size() == 1);
}
