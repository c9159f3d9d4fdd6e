//! Contiguous copies with an optional non-temporal store path.

/// Copy `src` into `dst`. With `streaming` set on x86_64, stores bypass the
/// cache where `dst` is 16-byte aligned; the result is identical either way.
#[inline]
pub(crate) fn copy_run(dst: &mut [f64], src: &[f64], streaming: bool) {
    debug_assert_eq!(dst.len(), src.len());
    #[cfg(target_arch = "x86_64")]
    if streaming {
        stream_copy(dst, src);
        return;
    }
    let _ = streaming;
    dst.copy_from_slice(src);
}

#[cfg(target_arch = "x86_64")]
fn stream_copy(dst: &mut [f64], src: &[f64]) {
    use std::arch::x86_64::{_mm_loadu_pd, _mm_stream_pd};

    let mut i = 0;
    if !(dst.as_ptr() as usize).is_multiple_of(16) && !dst.is_empty() {
        dst[0] = src[0];
        i = 1;
    }
    while i + 2 <= dst.len() {
        // SAFETY: i + 2 <= len for both slices, dst[i] is 16-byte aligned
        // (the head element was peeled off above), and SSE2 is baseline on
        // x86_64.
        unsafe {
            let v = _mm_loadu_pd(src.as_ptr().add(i));
            _mm_stream_pd(dst.as_mut_ptr().add(i), v);
        }
        i += 2;
    }
    if i < dst.len() {
        dst[i] = src[i];
    }
}

/// Order earlier streaming stores before any later access.
#[inline]
pub(crate) fn fence(streaming: bool) {
    #[cfg(target_arch = "x86_64")]
    if streaming {
        // SAFETY: sfence has no preconditions.
        unsafe { std::arch::x86_64::_mm_sfence() };
    }
    let _ = streaming;
}
