#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fountain/cli.hpp"
#include "fountain/error.hpp"

namespace fountain::cli {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::invalid_argument, "sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

RunContext::RunContext(const RunConfig& config, std::string command, std::vector<std::string> arguments)
    : config_(config),
      command_(std::move(command)),
      arguments_(std::move(arguments)),
      dir_(config.output_dir),
      started_(utc_now()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::invalid_argument, "output_dir: cannot create '" + dir_.string() + "': " + ec.message());
}

void RunContext::write_output(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) fail(ErrorCode::invalid_argument, "cannot write '" + path.string() + "'");
  outputs_.push_back({name, sha256_hex(content), content.size()});
}

std::filesystem::path RunContext::finish() {
  // The resolved config is itself an output so that a rerun can start from it.
  write_output("run.cfg", write_config(config_));
  nlohmann::ordered_json j;
  j["software"] = "fountain";
  j["version"] = kVersion;
  j["command"] = command_;
  j["arguments"] = arguments_;
  nlohmann::ordered_json cfg;
  std::istringstream lines(write_config(config_));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = cfg;
  j["started_utc"] = started_;
  j["finished_utc"] = utc_now();
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : outputs_) files.push_back({{"path", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["outputs"] = files;
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::invalid_argument, "cannot write '" + path.string() + "'");
  return path;
}

}  // namespace fountain::cli
