#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "keystone/protocol.hpp"

namespace keystone {

/// Line-delimited service over TCP. Each connection gets its own thread and
/// is answered strictly in order; responses are written whole, so concurrent
/// connections never interleave partial lines.
class TcpServer {
 public:
  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  TcpServer(Service service, std::uint16_t port, const std::string& host = "127.0.0.1");
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  Service service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::list<int> open_fds_;
  std::list<std::thread> workers_;
  std::thread acceptor_;
};

}  // namespace keystone
