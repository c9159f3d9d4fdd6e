use super::state::LatticeState;

impl LatticeState {
    /// Refresh every halo slot of the current buffer with its periodic image.
    ///
    /// Ghost columns wrap in x. For AoS/SoA the ghost rows of a column wrap
    /// in y; for clustered layouts the rows padding lane strip `k` hold the
    /// neighbouring rows of strips `k - 1` and `k + 1`, with the first and
    /// last strips wrapping onto each other.
    pub fn halo_exchange(&mut self) {
        let ps = self.desc.pop_stride();
        let npop = self.desc.npop;
        let buf = &mut self.prv[..];
        if ps == 1 {
            for &(dst, src) in &self.halo {
                buf.copy_within(src..src + npop, dst);
            }
        } else {
            for &(dst, src) in &self.halo {
                for p in 0..npop {
                    buf[dst + p * ps] = buf[src + p * ps];
                }
            }
        }
    }
}
