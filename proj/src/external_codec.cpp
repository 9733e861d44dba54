#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "codec_internal.hpp"
#include "lfhc/color.hpp"
#include "lfhc/errors.hpp"
#include "lfhc/image_io.hpp"

namespace lfhc::detail {

namespace {

class TempFile {
 public:
  TempFile() {
    auto dir = std::filesystem::temp_directory_path();
    std::string tmpl = (dir / "lfhc-XXXXXX").string();
    int fd = ::mkstemp(tmpl.data());
    if (fd < 0) throw ExternalCodecError("cannot create temporary file");
    ::close(fd);
    path_ = tmpl;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string substitute(std::string tpl, int w, int h, int n, int qp, const char* mode) {
  auto replace = [&tpl](const std::string& key, const std::string& value) {
    for (auto pos = tpl.find(key); pos != std::string::npos; pos = tpl.find(key, pos + value.size())) {
      tpl.replace(pos, key.size(), value);
    }
  };
  replace("{w}", std::to_string(w));
  replace("{h}", std::to_string(h));
  replace("{n}", std::to_string(n));
  replace("{qp}", std::to_string(qp));
  replace("{mode}", mode);
  return tpl;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

void write_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& data) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw ExternalCodecError("cannot write " + p.string());
}

std::vector<std::uint8_t> run(const std::string& cmd, const std::filesystem::path& input) {
  std::string full = cmd + " < " + shell_quote(input.string());
  std::FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) throw ExternalCodecError("cannot spawn: " + cmd);
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 14];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.insert(out.end(), buf, buf + got);
  int status = ::pclose(pipe);
  if (status != 0) throw ExternalCodecError("command failed (status " + std::to_string(status) + "): " + cmd);
  return out;
}

}  // namespace

std::vector<std::uint8_t> external_encode(std::span<const Image> frames, const CodecConfig& cfg) {
  const int w = frames.front().width(), h = frames.front().height();
  std::vector<std::uint8_t> raw;
  raw.reserve(frames.size() * 3 * static_cast<std::size_t>(w) * h);
  for (const Image& f : frames) {
    Image yuv = rgb_to_yuv(f);
    for (double v : yuv.data()) raw.push_back(to_u8(v));
  }
  TempFile in;
  write_file(in.path(), raw);
  return run(substitute(*cfg.external_cmd, w, h, static_cast<int>(frames.size()), cfg.qp, "encode"), in.path());
}

std::vector<Image> external_decode(std::span<const std::uint8_t> coded, int frame_count, int width,
                                   int height, int qp, const CodecConfig& cfg) {
  TempFile in;
  write_file(in.path(), std::vector<std::uint8_t>(coded.begin(), coded.end()));
  const std::string& tpl = cfg.external_decode_cmd ? *cfg.external_decode_cmd : *cfg.external_cmd;
  std::vector<std::uint8_t> raw = run(substitute(tpl, width, height, frame_count, qp, "decode"), in.path());
  const std::size_t frame_bytes = 3 * static_cast<std::size_t>(width) * height;
  if (raw.size() != frame_bytes * frame_count) {
    throw ExternalCodecError("external decoder produced " + std::to_string(raw.size()) + " bytes, expected " +
                             std::to_string(frame_bytes * frame_count));
  }
  std::vector<Image> frames;
  for (int i = 0; i < frame_count; ++i) {
    Image yuv(height, width, 3);
    for (std::size_t k = 0; k < frame_bytes; ++k) yuv.data()[k] = raw[i * frame_bytes + k] / 255.0;
    Image rgb = yuv_to_rgb(yuv);
    for (double& v : rgb.data()) v = std::clamp(v, 0.0, 1.0);
    frames.push_back(std::move(rgb));
  }
  return frames;
}

}  // namespace lfhc::detail
