fn main() -> anyhow::Result<()> {
    mmplan::app::run()
}
