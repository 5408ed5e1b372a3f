#include "scitab/gateway/gateway.hpp"

#include <csetjmp>
#include <cstdio>

#include <jpeglib.h>

namespace scitab::gateway {

namespace {

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

[[noreturn]] void on_jpeg_error(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

void silent_output(j_common_ptr) {}

}  // namespace

std::optional<std::vector<std::uint8_t>> downscale_jpeg(std::span<const std::uint8_t> image) {
    if (image.size() < 4 || image[0] != 0xFF || image[1] != 0xD8) return std::nullopt;

    jpeg_decompress_struct in{};
    jpeg_compress_struct out{};
    JpegError in_err{};
    JpegError out_err{};
    unsigned char* buffer = nullptr;
    unsigned long buffer_size = 0;
    std::vector<JSAMPLE> pixels;

    in.err = jpeg_std_error(&in_err.mgr);
    in_err.mgr.error_exit = on_jpeg_error;
    in_err.mgr.output_message = silent_output;
    out.err = jpeg_std_error(&out_err.mgr);
    out_err.mgr.error_exit = on_jpeg_error;
    out_err.mgr.output_message = silent_output;

    if (setjmp(in_err.jump) || setjmp(out_err.jump)) {
        jpeg_destroy_decompress(&in);
        jpeg_destroy_compress(&out);
        std::free(buffer);
        return std::nullopt;
    }

    jpeg_create_decompress(&in);
    jpeg_mem_src(&in, image.data(), static_cast<unsigned long>(image.size()));
    jpeg_read_header(&in, TRUE);
    in.scale_num = 1;
    in.scale_denom = 2;
    jpeg_start_decompress(&in);

    const auto width = in.output_width;
    const auto height = in.output_height;
    const auto channels = in.output_components;
    const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    pixels.resize(stride * height);
    while (in.output_scanline < height) {
        JSAMPROW row = pixels.data() + stride * in.output_scanline;
        jpeg_read_scanlines(&in, &row, 1);
    }
    const auto color_space = in.out_color_space;
    jpeg_finish_decompress(&in);
    jpeg_destroy_decompress(&in);

    jpeg_create_compress(&out);
    jpeg_mem_dest(&out, &buffer, &buffer_size);
    out.image_width = width;
    out.image_height = height;
    out.input_components = channels;
    out.in_color_space = color_space;
    jpeg_set_defaults(&out);
    jpeg_set_quality(&out, 80, TRUE);
    jpeg_start_compress(&out, TRUE);
    while (out.next_scanline < height) {
        JSAMPROW row = pixels.data() + stride * out.next_scanline;
        jpeg_write_scanlines(&out, &row, 1);
    }
    jpeg_finish_compress(&out);
    std::vector<std::uint8_t> result(buffer, buffer + buffer_size);
    jpeg_destroy_compress(&out);
    std::free(buffer);
    return result;
}

}  // namespace scitab::gateway
