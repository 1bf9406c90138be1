#include <hdae/log.hpp>

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace hdae {

spdlog::logger& log() {
	static std::shared_ptr<spdlog::logger> logger = [] {
		auto l = spdlog::stderr_color_mt("hdae");
		l->set_pattern("[%l] %v");
		auto level = spdlog::level::warn;
		if (const char* env = std::getenv("HYBRID_DAE_LOG"))
			level = spdlog::level::from_str(env);
		l->set_level(level);
		return l;
	}();
	return *logger;
}

} // namespace hdae
