#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lfhc/errors.hpp"
#include "lfhc/fixtures.hpp"
#include "lfhc/lightfield.hpp"
#include "lfhc/metrics.hpp"
#include "lfhc/pipeline.hpp"

namespace {

struct InputOptions {
  std::string dir;
  int grid = 9;
  int inner = 9;
};

struct TuningOptions {
  std::uint64_t seed = 0;
  int layer_iters = 2000;
  int fdl_layers = 30;
  int calib_iters = 10;
  double lambda = 1e-4;
  int window = 8;
  std::string codec = "baseline";
  std::string codec_cmd;
  std::string codec_decode_cmd;
};

void add_input(CLI::App* app, InputOptions& in) {
  app->add_option("--in", in.dir, "directory of view_SS_TT.png files")->required()->check(CLI::ExistingDirectory);
  app->add_option("--grid", in.grid, "angular grid size of the input directory")->check(CLI::PositiveNumber);
  app->add_option("--inner", in.inner, "centered sub-grid to code")->check(CLI::PositiveNumber);
}

void add_codec(CLI::App* app, TuningOptions& t) {
  app->add_option("--codec", t.codec, "codec backend")->check(CLI::IsMember({"baseline", "external"}));
  app->add_option("--codec-cmd", t.codec_cmd, "external encoder template ({w} {h} {n} {qp} {mode})");
  app->add_option("--codec-decode-cmd", t.codec_decode_cmd, "external decoder template");
}

void add_tuning(CLI::App* app, TuningOptions& t) {
  app->add_option("--seed", t.seed, "seed for layer initialization and BK-SVD sketches");
  app->add_option("--layer-iters", t.layer_iters, "layer optimizer iteration cap")->check(CLI::PositiveNumber);
  app->add_option("--fdl-layers", t.fdl_layers, "number of Fourier disparity layers")->check(CLI::PositiveNumber);
  app->add_option("--calib-iters", t.calib_iters, "calibration sweeps")->check(CLI::NonNegativeNumber);
  app->add_option("--lambda", t.lambda, "ridge weight")->check(CLI::PositiveNumber);
  app->add_option("--window", t.window, "border window width in pixels")->check(CLI::NonNegativeNumber);
  add_codec(app, t);
}

lfhc::CodecConfig codec_config(const TuningOptions& t) {
  lfhc::CodecConfig c;
  if (t.codec == "external") {
    c.backend = lfhc::CodecBackend::External;
    if (t.codec_cmd.empty()) throw lfhc::InvalidArgument("--codec external requires --codec-cmd");
    c.external_cmd = t.codec_cmd;
    if (!t.codec_decode_cmd.empty()) c.external_decode_cmd = t.codec_decode_cmd;
  }
  return c;
}

lfhc::EncodeConfig encode_config(const TuningOptions& t) {
  lfhc::EncodeConfig cfg;
  cfg.layer_opts.rng_seed = t.seed;
  cfg.layer_opts.max_iters = t.layer_iters;
  cfg.bk_params.rng_seed = t.seed;
  cfg.fdl_params.layers = t.fdl_layers;
  cfg.fdl_params.calib_iters = t.calib_iters;
  cfg.fdl_params.lambda = t.lambda;
  cfg.fdl_params.window_px = t.window;
  cfg.codec = codec_config(t);
  return cfg;
}

lfhc::LightField load_input(const InputOptions& in) {
  lfhc::LightField lf = lfhc::load_lightfield(in.dir, in.grid, in.grid);
  return in.inner == in.grid ? lf : lfhc::crop_inner_grid(lf, in.inner);
}

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw lfhc::InvalidArgument("bad integer list entry '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_report(const lfhc::EncodeReport& r) {
  std::printf("subset  views  bytes  stage1_bytes  yuv_psnr\n");
  for (std::size_t i = 0; i < r.subsets.size(); ++i) {
    const auto& s = r.subsets[i];
    std::printf("%6zu  %5zu  %5zu  %12zu  %8.3f\n", i + 1, s.views.size(), s.bytes, s.stage1_bytes, s.yuv.combined);
  }
  std::printf("container bytes %zu, YUV-PSNR %.3f dB (Y %.3f, U %.3f, V %.3f)\n", r.container_bytes,
              r.yuv.combined, r.yuv.y, r.yuv.u, r.yuv.v);
  std::printf("disparities:");
  for (double d : r.calibration.disparities) std::printf(" %.3f", d);
  std::printf("%s\n", r.calibration.identifiable ? "" : " (unidentifiable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid light field codec: layer factorization, low-rank approximation and FDL prediction"};
  app.require_subcommand(1);

  InputOptions enc_in;
  TuningOptions enc_t;
  std::string enc_out, enc_order = "c2";
  int enc_rank = 8, enc_qp = 14;
  bool emit_stage1 = false;
  auto* enc = app.add_subcommand("encode", "encode a view directory into an LFHC container");
  add_input(enc, enc_in);
  add_tuning(enc, enc_t);
  enc->add_option("--out", enc_out, "output container")->required();
  enc->add_option("--order", enc_order, "scan order")->check(CLI::IsMember({"c2", "c4", "h2", "h4"}, CLI::ignore_case));
  enc->add_option("--rank", enc_rank, "BK-SVD rank")->check(CLI::PositiveNumber);
  enc->add_option("--qp", enc_qp, "codec quantization parameter")->check(CLI::Range(0, 51));
  enc->add_flag("--emit-stage1", emit_stage1, "also store the coded layer payloads");

  std::string dec_in, dec_out;
  TuningOptions dec_t;
  auto* dec = app.add_subcommand("decode", "decode an LFHC container into a view directory");
  dec->add_option("--in", dec_in, "input container")->required()->check(CLI::ExistingFile);
  dec->add_option("--out", dec_out, "output directory")->required();
  add_codec(dec, dec_t);

  InputOptions sw_in;
  TuningOptions sw_t;
  std::string sw_ranks = "4,8,16,28,44,52,60", sw_qps = "2,6,10,14,20,26,38", sw_csv, sw_order = "c2";
  auto* sweep = app.add_subcommand("sweep", "rate-distortion sweep over ranks and qps");
  add_input(sweep, sw_in);
  add_tuning(sweep, sw_t);
  sweep->add_option("--ranks", sw_ranks, "comma separated ranks");
  sweep->add_option("--qps", sw_qps, "comma separated qps");
  sweep->add_option("--order", sw_order, "scan order")->check(CLI::IsMember({"c2", "c4", "h2", "h4"}, CLI::ignore_case));
  sweep->add_option("--csv", sw_csv, "output CSV")->required();

  InputOptions ref_in, test_in;
  auto* metrics = app.add_subcommand("metrics", "PSNR between two view directories");
  metrics->add_option("--ref", ref_in.dir, "reference directory")->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--test", test_in.dir, "test directory")->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--grid", ref_in.grid, "angular grid size")->check(CLI::PositiveNumber);

  std::string gen_spec, gen_out;
  int gen_grid = 9, gen_size = 64;
  auto* gen = app.add_subcommand("gen", "write a synthetic light field");
  gen->add_option("--spec", gen_spec, "constant:V | plane:D | two-plane:FAR,NEAR | layers, optional @SEED")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--grid", gen_grid, "angular grid size")->check(CLI::PositiveNumber);
  gen->add_option("--size", gen_size, "view height and width")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enc) {
      lfhc::EncodeConfig cfg = encode_config(enc_t);
      cfg.scan_order = lfhc::parse_scan_kind(enc_order);
      cfg.rank = enc_rank;
      cfg.qp = enc_qp;
      cfg.emit_stage1 = emit_stage1;
      lfhc::LightField lf = load_input(enc_in);
      lfhc::EncodeResult res = lfhc::encode(lf, cfg);
      std::vector<std::uint8_t> bytes = lfhc::serialize(res.bitstream);
      std::ofstream out(enc_out, std::ios::binary);
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw lfhc::Error("cannot write " + enc_out);
      print_report(res.report);
    } else if (*dec) {
      std::ifstream in(dec_in, std::ios::binary);
      std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      lfhc::CodecConfig hints = codec_config(dec_t);
      lfhc::save_lightfield(lfhc::decode(bytes, hints), dec_out);
    } else if (*sweep) {
      lfhc::EncodeConfig cfg = encode_config(sw_t);
      cfg.scan_order = lfhc::parse_scan_kind(sw_order);
      std::vector<int> ranks = parse_list(sw_ranks);
      std::vector<int> qps = parse_list(sw_qps);
      lfhc::LightField lf = load_input(sw_in);
      std::vector<lfhc::RdRow> rows = lfhc::rd_sweep(lf, ranks, qps, cfg);
      lfhc::write_rd_csv(sw_csv, rows);
      for (const auto& r : rows) {
        if (r.subset == 0) std::printf("rank %3d  qp %2d  bytes %8zu  YUV-PSNR %.3f\n", r.rank, r.qp, r.bytes, r.psnr_yuv);
      }
    } else if (*metrics) {
      lfhc::LightField ref = lfhc::load_lightfield(ref_in.dir, ref_in.grid, ref_in.grid);
      lfhc::LightField test = lfhc::load_lightfield(test_in.dir, ref_in.grid, ref_in.grid);
      lfhc::YuvPsnr q = lfhc::yuv_psnr(ref, test);
      std::printf("psnr_y %.4f\npsnr_u %.4f\npsnr_v %.4f\npsnr_yuv %.4f\n", q.y, q.u, q.v, q.combined);
    } else if (*gen) {
      lfhc::SyntheticSceneSpec spec = lfhc::parse_scene_spec(gen_spec);
      lfhc::save_lightfield(lfhc::generate(spec, gen_grid, gen_grid, gen_size, gen_size), gen_out);
    }
  } catch (const lfhc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
